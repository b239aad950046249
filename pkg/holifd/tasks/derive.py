import numpy as np
import pandas as pd

from holifd.core.derive import GammaSeries, derive_projectors, printed_series, verify_projector
from holifd.core.polyfield import PiecewiseField
from holifd.hooks.svg import Curve, SvgHook
from holifd.tasks.base import BaseTask

PLOT_SAMPLES = 64


class DeriveTask(BaseTask):
    command = "derive"

    def launch(self):
        self.logger.info("Launching derive task")
        order = self.run_config.order
        series = derive_projectors(order, allow_stretch=bool(self.run_config.extra.get("allow_stretch", False)))
        report = verify_projector(series)

        self.files.write_json({"config": self.header, **series.to_dict()}, self.run_config.output_name("json", "projector.json"))
        self.files.write_frame(self.coefficient_table(series), self.run_config.output_name("table", "coefficients.csv"), self.header)
        self.files.write_frame(pd.DataFrame(report.to_rows()), self.run_config.output_name("verify", "verification.csv"), self.header)
        self.plot(series)

        if self.check:
            self.require(report.ok_through(series.order - 1), f"adjoint constraints hold through order {series.order - 1}")
            golden = self.golden(series)
            self.require(series.at(1) == golden, f"gamma = 1 projector matches the order-{order} closed form")
        self.logger.info("Derive task finished!")

    @staticmethod
    def golden(series: GammaSeries) -> PiecewiseField:
        if series.order == 1:
            return PiecewiseField.characteristic(series.grid, 0)
        return printed_series(series.grid).at(1)

    @staticmethod
    def coefficient_table(series: GammaSeries) -> pd.DataFrame:
        rows = []
        labelled = [(f"gamma^{n}", term) for n, term in enumerate(series.terms)] + [("gamma=1", series.at(1))]
        width = 1 + max((p.degree for _, f in labelled for p in f.pieces.values()), default=0)
        for label, field in labelled:
            for offset, poly in sorted(series.offset_pieces(field).items()):
                coeffs = list(poly.coefficients) + [0] * (width - len(poly.coefficients))
                rows.append({"term": label, "offset": offset, **{f"xi^{n}": str(c) for n, c in enumerate(coeffs)}})
        return pd.DataFrame(rows)

    def plot(self, series: GammaSeries):
        z = series.at(1).to_float()
        xi = np.linspace(-0.5, 0.5, PLOT_SAMPLES, endpoint=False)
        xs, ys = [], []
        for offset in range(-(series.order), series.order + 1):
            xs.append(offset + xi)
            ys.append(np.array([float(z.piece(offset)(q)) for q in xi]))
        curve = Curve(np.concatenate(xs), np.concatenate(ys), f"z_j, order {series.order}")
        SvgHook(self.out_dir).plot([curve], self.run_config.output_name("plot", "projector.svg"), "(x - x_j)/h", "z_j")


if __name__ == "__main__":
    task = DeriveTask()
    task.launch()
