import numpy as np
import pandas as pd

from holifd.tasks.base import BaseTask

MASS_TOLERANCE = 1e-10


class ProjectTask(BaseTask):
    command = "project"

    def launch(self):
        self.logger.info("Launching project task")
        grid = self.run_config.grid()
        u0 = self.initial_field()
        state = self.initial_state(u0)
        frame = pd.DataFrame({"j": np.arange(grid.m), "x": grid.centres(), "u": state.u})
        self.files.write_frame(frame, self.run_config.output_name("state", "state.csv"), self.header)

        if self.check and self.run_config.a == 0:
            mass, target = state.mass(), u0.mass(grid)
            self.require(abs(mass - target) <= MASS_TOLERANCE * max(1.0, abs(target)), f"projected mass {mass} equals {target}")
        self.logger.info("Project task finished!")
        return state


if __name__ == "__main__":
    task = ProjectTask()
    task.launch()
