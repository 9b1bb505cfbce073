"""Object-centric process discovery with soundness-preserving repairs."""

from .discovery import ProcessTree, disc_per_type, inductive_miner, tree_to_wf_net
from .extensions import RepairTrace, discover, ocpd_da, ocpd_sa, ocpd_si, similar_activity_transform
from .log import Event, EventLog, LogError, SimpleEventLog, flatten, make_event, parse_log, read_log
from .ocpn import (
    AcceptingOCPN,
    Binding,
    ObjectCentricPetriNet,
    enabled_bindings,
    fire_binding,
    is_oc_sound,
    is_oc_wf_net,
    ocpd_base,
    project,
    replay,
    to_dot,
)
from .patterns import PatternMatch, detect_oiwl, detect_oiwl_sub, detect_spurious, log_without
from .petri import AcceptingPetriNet, LabeledPetriNet, Multiset, NetError, Status, is_sound_wf_net

__version__ = "0.1.0"

__all__ = [
    "AcceptingOCPN", "AcceptingPetriNet", "Binding", "Event", "EventLog", "LabeledPetriNet",
    "LogError", "Multiset", "NetError", "ObjectCentricPetriNet", "PatternMatch", "ProcessTree",
    "RepairTrace", "SimpleEventLog", "Status", "detect_oiwl", "detect_oiwl_sub", "detect_spurious",
    "disc_per_type", "discover", "enabled_bindings", "fire_binding", "flatten", "inductive_miner",
    "is_oc_sound", "is_oc_wf_net", "is_sound_wf_net", "log_without", "make_event", "ocpd_base",
    "ocpd_da", "ocpd_sa", "ocpd_si", "parse_log", "project", "read_log", "replay",
    "similar_activity_transform", "to_dot", "tree_to_wf_net",
]
