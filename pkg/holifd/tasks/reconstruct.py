from fractions import Fraction

import pandas as pd

from holifd.core.projector import point_release_ic
from holifd.core.subgrid import reconstruct
from holifd.hooks.svg import Curve, SvgHook
from holifd.tasks.base import BaseTask

ETA_STYLES = ("-.", "--", "-")


class ReconstructTask(BaseTask):
    """
    Dense reconstruction of v(u(0), x). With ``etas`` in the configuration each value
    gives one unit point release in element k; otherwise the configured initial field
    is projected.
    """

    command = "reconstruct"

    def launch(self):
        self.logger.info("Launching reconstruct task")
        rc = self.run_config
        grid, params = rc.grid(), rc.params()
        states = {}
        if "etas" in rc.extra:
            for eta in rc.extra["etas"]:
                label = f"eta={Fraction(str(eta)).limit_denominator(64)}"
                states[label] = point_release_ic(rc.centre_element, float(Fraction(str(eta))), 1.0, params, grid)
        else:
            states["v"] = self.initial_state()

        frame = None
        for label, state in states.items():
            x, values = reconstruct(state.u, params, grid, rc.samples)
            if frame is None:
                frame = pd.DataFrame({"x": x})
            frame[label] = values
        self.files.write_frame(frame, rc.output_name("field", "field.csv"), self.header)

        curves = [
            Curve(frame["x"].to_numpy(), frame[label].to_numpy(), label, ETA_STYLES[i % len(ETA_STYLES)])
            for i, label in enumerate(states)
        ]
        SvgHook(self.out_dir).plot(curves, rc.output_name("plot", "field.svg"), "x", "v(u(0), x)")
        self.logger.info("Reconstruct task finished!")
        return frame


if __name__ == "__main__":
    task = ReconstructTask()
    task.launch()
