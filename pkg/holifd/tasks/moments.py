from holifd.core.diagnostics import moment_evolution
from holifd.tasks.base import BaseTask

DEFAULT_SLOPE_TOLERANCE = 1e-3


class MomentsTask(BaseTask):
    command = "moments"

    def launch(self):
        self.logger.info("Launching moments task")
        rc = self.run_config
        state = self.initial_state()
        report = moment_evolution(state, rc.params(), rc.integration(), k=rc.centre_element, window=rc.fit_window)
        self.files.write_frame(report.to_frame(), rc.output_name("moments", "moments.csv"), self.header)
        summary = {
            "config": self.header,
            "slope_m2": report.slope,
            "window": list(report.window),
            "m0": report.m0[0],
            "m1": report.m1[0],
            "m2": report.m2[0],
        }
        self.files.write_json(summary, rc.output_name("summary", "moments.json"))

        if self.check and rc.a == 0:
            tol = float(rc.extra.get("slope_tolerance", DEFAULT_SLOPE_TOLERANCE))
            self.require(abs(report.slope - 2) <= tol, f"dm2/dt = {report.slope:.6f} within {tol} of 2")
        self.logger.info("Moments task finished!")
        return report


if __name__ == "__main__":
    task = MomentsTask()
    task.launch()
