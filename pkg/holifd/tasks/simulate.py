from dataclasses import replace

import numpy as np

from holifd.core.model import integrate
from holifd.tasks.base import BaseTask

MASS_TOLERANCE = 1e-9


class SimulateTask(BaseTask):
    command = "simulate"

    def launch(self):
        self.logger.info("Launching simulate task")
        rc = self.run_config
        state = self.initial_state()
        cfg = replace(rc.integration(), snapshot_every=int(rc.extra.get("snapshot_every", 1)))
        trajectory = integrate(state.u, rc.params(), cfg)
        self.files.write_frame(trajectory.to_frame(), rc.output_name("trajectory", "trajectory.csv"), self.header)

        if self.check and rc.a == 0:
            drift = float(np.max(np.abs(trajectory.states.sum(axis=1) - state.u.sum()))) * rc.h
            self.require(drift <= MASS_TOLERANCE, f"mass drift {drift:.3e} within {MASS_TOLERANCE}")
        self.logger.info("Simulate task finished!")
        return trajectory


if __name__ == "__main__":
    task = SimulateTask()
    task.launch()
