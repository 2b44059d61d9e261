from .records import TrajectoryRecord, load_trajectories, records_to_frame
from .speed_field import GridExtent, SpeedField, crop_to
from .aggregate import TrajectorySplit, aggregate, select_window, split_trajectories, trim_empty_borders
