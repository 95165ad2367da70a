import logging

from controllers import (
    HomeoController, MetricsController, GeneratorController, OrderingController,
    ActionController, ReportController,
)
from utils.config_manager import ConfigManager

logger = logging.getLogger(__name__)


class QilineApp:
    """
    Application hub: owns the configuration and every controller.
    """
    def __init__(self, config_file="config.json"):
        """
        Initialize the application.

        Args:
            config_file (str): JSON file with configuration overrides
        """
        # Initialize config manager
        self.config_manager = ConfigManager(config_file)
        self.config = self.config_manager.config
        self.eval_config = self.config_manager.eval_config()

        # Setup controllers
        self.homeo_controller = HomeoController(self)
        self.metrics_controller = MetricsController(self)
        self.generator_controller = GeneratorController(self)
        self.ordering_controller = OrderingController(self)
        self.action_controller = ActionController(self)
        self.report_controller = ReportController(self)

    def configure(self, save=False, **overrides):
        """
        Apply run overrides (None values are ignored) and rebuild the evaluation settings.

        Args:
            save (bool): also write the overridden settings to the config file

        Returns:
            RunConfig: the settings of this run
        """
        settings = {}
        grid = overrides.pop("grid", None)
        if grid is not None:
            settings.update(zip(("grid_x0", "grid_ratio", "grid_count"), grid))
        if "max_len" in overrides:
            overrides["max_word_length"] = overrides.pop("max_len")
        for key in ("abs_tol", "precision_bits", "output_format", "seed", "max_workers",
                    "max_word_length"):
            if overrides.get(key) is not None:
                settings[key] = overrides[key]
        for key, value in settings.items():
            self.config_manager.set(key, value, persist=False)
        if save:
            self.config_manager.save_config()
            logger.info("Saved %d settings to %s", len(settings), self.config_manager.config_file)
        self.eval_config = self.config_manager.eval_config()
        run = self.config_manager.run_config()
        logger.debug("Run settings: %s", run.to_dict())
        return run
