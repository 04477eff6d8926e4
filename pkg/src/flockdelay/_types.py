from __future__ import annotations

from typing import TYPE_CHECKING

import numpy as np
import numpy.typing as npt

FloatArray = npt.NDArray[np.float64]
# (positions, velocities), each shaped (N, d)
State = tuple[FloatArray, FloatArray]


if TYPE_CHECKING:
    from typing import Protocol

    class StateLookup(Protocol):
        """Anything that answers delayed state queries."""

        def sample(self, s: float) -> State: ...

        def sample_many(self, times: FloatArray) -> tuple[FloatArray, FloatArray]: ...

    class RichProtocol(Protocol):
        def __rich__(self) -> str: ...
