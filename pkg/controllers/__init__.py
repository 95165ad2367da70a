from controllers.homeo_controller import HomeoController
from controllers.metrics_controller import MetricsController
from controllers.generator_controller import GeneratorController
from controllers.ordering_controller import OrderingController
from controllers.action_controller import ActionController
from controllers.report_controller import ReportController

__all__ = ['HomeoController', 'MetricsController', 'GeneratorController', 'OrderingController',
           'ActionController', 'ReportController']
