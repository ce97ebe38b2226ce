import numpy as np
import pytest


class LinearKalman:
    """Closed-form linear Kalman filter (test oracle)."""

    def __init__(self, m, P, A, H, Q, R):
        self.m = np.asarray(m, dtype=float).copy()
        self.P = np.asarray(P, dtype=float).copy()
        self.A, self.H, self.Q, self.R = (np.asarray(x, dtype=float) for x in (A, H, Q, R))

    def predict(self):
        self.m = self.A @ self.m
        self.P = self.A @ self.P @ self.A.T + self.Q

    def update(self, y):
        S = self.H @ self.P @ self.H.T + self.R
        K = self.P @ self.H.T @ np.linalg.inv(S)
        self.m = self.m + K @ (np.asarray(y) - self.H @ self.m)
        self.P = self.P - K @ S @ K.T
        return self.H @ self.m, S


@pytest.fixture
def linear_kalman():
    return LinearKalman
