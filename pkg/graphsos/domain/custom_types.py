"""Contains custom types."""
from typing import Mapping, Tuple

import numpy as np
import numpy.typing as npt

NodeId = int
Edge = Tuple[NodeId, NodeId]
Triple = Tuple[str, str, str]
LabelAssignment = Mapping[NodeId, str]
Vector = npt.NDArray[np.float64]
