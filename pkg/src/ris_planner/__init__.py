"""RIS deployment planning on obstructed grids.

Place reconfigurable intelligent surfaces so that blocked device pairs get an
indirect line of sight (one or two reflections), then pick energy-efficient
RIS subgroups per pair.
"""

from .blind_pairs import BlindPairSet, DevicePair, PairClass, classify_pair, identify_blind_pairs
from .channel import ChannelBank, ChannelParams, LinkEvaluation, RisSpec
from .coverage import CoverageTables, coverable_universe
from .deploy import DeployBudget, DeploymentPlan, exact_deploy, greedy_deploy, greedy_single_only
from .environment import Environment, GridSpec, Point, build_environment, has_los, visible_via
from .errors import RisPlannerError, ValidationError
from .group_select import CandidateSets, Selection, SubgroupRef, candidate_sets, select_batch, select_group

__version__ = "0.1.0"
