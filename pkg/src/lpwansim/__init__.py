"""System-level simulator of vehicle-assisted LPWAN uplink in a Manhattan grid.

Quantifies how opportunistic (driving) and incentivized (parked) vehicle
relays change uplink SINR and machine energy efficiency for four radio
technologies: SIGFOX, LoRaWAN, Wi-Fi HaLow and NB-IoT.
"""

__version__ = "0.1.0"

from .channel import ChannelParams, ShadowField, path_gain, sinr_db, transmission_sinr
from .engine import ReplicationLog, TransmissionRecord, run_campaign, run_replication, write_log_csv
from .errors import (CalibrationError, CampaignError, ConfigError, MetricsError,
                     PlacementError, ProfileError, SimulationError, StepSizeError)
from .involvement import (AssociationDecision, associate, choose_type1_assistants,
                          choose_type2_parking, kmeans)
from .metrics import MetricsReport, aggregate, energy_efficiency, write_summary_csv
from .mobility import MobilityField, MobilityState, park_vehicle, step
from .rats import (Mcs, RatProfile, airtime, duty_cycle_gate, load_profiles,
                   lora_time_on_air, select_link_params)
from .scenario import (Involvement, Node, NodeKind, ScenarioConfig, World,
                       build_world, calibrate_bs_distance, config_from_dict,
                       config_hash, load_config, sample_vehicle_gaps,
                       write_snapshot_csv)
from .traffic import MessageEvent, schedule

__all__ = [name for name in dir() if not name.startswith("_")]
