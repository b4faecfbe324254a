"""Published rate constants for two 8-stage and two 16-stage PUF instances.

Rows are (top, bottom) paths, columns are stages 1..N.  PUF 1 of each pair
answers its challenge with 1, PUF 2 with 0.
"""

import numpy as np

CHALLENGE_8 = "11101010"

PUF8_1 = np.array([
    [16.2000, 16.3874, 17.8391, 14.2102, 15.8676, 16.1017, 15.4241, 17.0567],
    [13.4213, 17.7129, 14.0757, 16.2111, 16.8199, 14.8264, 16.3124, 15.0728],
])
PUF8_2 = np.array([
    [15.3259, 17.3474, 15.3472, 17.276, 17.4534, 15.7802, 15.3876, 16.8865],
    [16.0853, 16.3489, 16.2476, 16.5559, 15.937, 14.9865, 16.7846, 16.8834],
])

CHALLENGE_16 = "0100000000110001"

PUF16_1 = np.array([
    [16.2713, 16.1154, 16.0443, 15.6363, 14.8986, 14.9884, 14.2514, 15.3905,
     15.8301, 15.8637, 17.1239, 17.0826, 17.0086, 16.9753, 15.9769, 15.2015],
    [15.7969, 16.1660, 16.1474, 15.6422, 17.0791, 15.3631, 15.5394, 17.7289,
     14.0328, 16.9466, 14.6572, 16.1119, 15.6691, 16.5813, 16.5878, 16.2887],
])
PUF16_2 = np.array([
    [16.0475, 17.2968, 15.6063, 16.7512, 16.7523, 16.4987, 16.9658, 16.9509,
     17.6698, 17.044, 15.8186, 15.9833, 17.7202, 17.3745, 15.2481, 16.2475],
    [16.5777, 16.2362, 16.1138, 14.3944, 17.3143, 16.2662, 16.9262, 14.7676,
     16.1303, 16.5323, 16.0368, 15.2344, 16.5067, 18.0267, 16.7487, 15.8938],
])

# (rates, challenge, expected response)
PUBLISHED = {
    "8-stage PUF 1": (PUF8_1, CHALLENGE_8, 1),
    "8-stage PUF 2": (PUF8_2, CHALLENGE_8, 0),
    "16-stage PUF 1": (PUF16_1, CHALLENGE_16, 1),
    "16-stage PUF 2": (PUF16_2, CHALLENGE_16, 0),
}
