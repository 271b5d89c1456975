"""Python bindings for the osteonav C++ library.

Poses are 4x4 homogeneous numpy arrays named ``a_from_b``; lengths in mm,
times in s, angles in rad.
"""

from ._osteonav import *  # noqa: F401,F403
from ._osteonav import __doc__  # noqa: F401
