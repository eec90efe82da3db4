from all_nodes_test_base import TestAllNodesBase

from test_game import TestGameNodes
from test_schedules import TestScheduleNodes
from test_learner import TestLearnerNodes
from test_smoothing import TestSmoothingNodes
from test_solvers import TestSolverNodes
from test_experiment import TestExperimentNodes


class TestAllNodes(TestAllNodesBase):
    sub_test_classes = [
        TestGameNodes,
        TestScheduleNodes,
        TestLearnerNodes,
        TestSmoothingNodes,
        TestSolverNodes,
        TestExperimentNodes,
    ]
