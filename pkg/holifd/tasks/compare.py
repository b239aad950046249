from holifd.core.diagnostics import (
    MASS_ERROR,
    NAIVE,
    PROJECTION,
    STRATEGIES,
    ComparisonConfig,
    compare_ic_strategies,
    convergence_orders,
    order_gap,
)
from holifd.hooks.svg import Curve, SvgHook
from holifd.operators.sweep import SweepOperator
from holifd.tasks.base import BaseTask

STYLES = {"naive": "o-", "average": "s--", "projection": "^-."}
# naive sampling must converge at least this many orders slower in the mass moment
MIN_ORDER_GAP = 1.0


class CompareTask(BaseTask):
    command = "compare"

    def comparison_config(self) -> ComparisonConfig:
        rc = self.run_config
        centre = rc.extra.get("centre")
        return ComparisonConfig(
            length=rc.m * rc.h,
            sweep=tuple(rc.sweep),
            T=rc.T,
            dt_fraction=float(rc.extra.get("dt_fraction", 1 / 8)),
            fine_factor=rc.fine_factor,
            origin=rc.origin,
            centre=None if centre is None else float(centre),
            strategies=tuple(rc.extra.get("strategies", STRATEGIES)),
        )

    def launch(self):
        self.logger.info("Launching compare task")
        rc = self.run_config
        cfg = self.comparison_config()
        u0 = self.initial_field()
        table = compare_ic_strategies(u0, rc.params(), cfg, mapper=SweepOperator().map, source=rc.grid())
        orders = convergence_orders(table)
        self.files.write_frame(table, rc.output_name("table", "compare.csv"), self.header)
        self.files.write_frame(orders, rc.output_name("orders", "orders.csv"), self.header)
        curves = [
            Curve(group["h"].to_numpy(), group["error"].to_numpy(), strategy, STYLES.get(strategy, "-"))
            for strategy, group in table.groupby("strategy", sort=False)
        ]
        SvgHook(self.out_dir).plot(curves, rc.output_name("plot", "compare.svg"), "h", "L2 error at T", loglog=True)

        if self.check and {NAIVE, PROJECTION} <= set(cfg.strategies):
            for m, group in table.groupby("m"):
                errors = group.set_index("strategy")["error"]
                self.require(
                    errors[PROJECTION] < errors[NAIVE],
                    f"projection error {errors[PROJECTION]:.3e} below naive {errors[NAIVE]:.3e} at m={m}",
                )
            # the reconstructed mass is conserved exactly by the projection only when a = 0
            if rc.a == 0 and len(cfg.sweep) > 1:
                gap = order_gap(orders, MASS_ERROR)
                self.require(gap >= MIN_ORDER_GAP, f"naive mass error converges {gap:.2f} orders slower than projection")
        self.logger.info("Compare task finished!")
        return table


if __name__ == "__main__":
    task = CompareTask()
    task.launch()
