"""Physical constants and numerical guards shared by the navigation code.

Units are feet and seconds for the gravity model; angles are radians.
"""

import numpy as np

# Gravitational parameter, ft^3 / s^2
GRAV_PARAM = 0.14076539e17
# Earth radius, ft
EARTH_RADIUS_FT = 20_902_900.0
# Euler-rate kinematics divide by cos(pitch); reject states at the edge.
PITCH_GUARD = np.pi / 2.0 - 1e-6
# Longitude-rate term divides by a cosine of the first position angle.
POLAR_COS_GUARD = 1e-9
