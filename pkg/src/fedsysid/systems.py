"""Linearly-parameterized nonlinear dynamics and trajectory generation.

Every system in this module fits the template

    target_t = theta* . phi(x_t, u_t) + scaled noise,

where ``phi`` is a known nonlinear feature map and ``theta*`` is the unknown
parameter matrix the rest of the library estimates.  Targets are next states
for the synthetic benchmark and Euler-step residuals for the physical systems,
so the regression identity holds exactly when the disturbance is zero.

Three concrete instances are provided:

* a synthetic benchmark  x_{t+1} = A sin(x_t) + B u_t + w_t,
* a torque-driven pendulum regressed on its angular-velocity residual,
* a quadrotor (position, velocity, quaternion attitude, body rates) regressed
  on its velocity and body-rate residuals.

Client fleets share a nominal system and differ through random perturbations
of bounded size along fixed direction matrices.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from typing import Callable, Optional, Sequence, Union

import numpy as np

from .errors import ConfigError, SimulationDiverged
from .rng import SEED_DATA, SEED_FLEET, SEED_HETEROGENEITY, SEED_SYSTEM, as_key, substream

#: Feature-term vocabulary.  Every implemented feature map must declare each
#: coordinate as one of these kinds; all of them are real-analytic, which is
#: the structural stand-in for the smoothness assumption the theory needs.
ANALYTIC_TERM_KINDS = frozenset({"sine", "linear", "product"})


@dataclass(frozen=True)
class FeatureMap:
    """A pure mapping (state, input) -> regressor vector of length n_phi."""

    n_x: int
    n_u: int
    n_phi: int
    eval: Callable[[np.ndarray, np.ndarray], np.ndarray]
    term_kinds: tuple[str, ...]

    def __post_init__(self) -> None:
        if self.n_x < 1 or self.n_u < 1 or self.n_phi < 1:
            raise ConfigError(
                f"feature map dimensions must be positive, got "
                f"n_x={self.n_x}, n_u={self.n_u}, n_phi={self.n_phi}"
            )
        if len(self.term_kinds) != self.n_phi:
            raise ConfigError(
                f"term_kinds has {len(self.term_kinds)} entries for n_phi={self.n_phi}"
            )
        unknown = set(self.term_kinds) - ANALYTIC_TERM_KINDS
        if unknown:
            raise ConfigError(f"unknown feature term kinds: {sorted(unknown)}")


@dataclass(frozen=True)
class NoiseSpec:
    """Distribution descriptor for initial states and input dither.

    ``scale`` is the standard deviation for the normal family and the
    half-width for the uniform family; it may be per-coordinate.
    """

    family: str  # "normal" | "uniform" | "zero"
    scale: Union[float, tuple[float, ...]] = 1.0

    def __post_init__(self) -> None:
        if self.family not in ("normal", "uniform", "zero"):
            raise ConfigError(f"unknown distribution family {self.family!r}")
        if np.any(np.asarray(self.scale) < 0):
            raise ConfigError("distribution scale must be non-negative")

    def sample(self, rng: np.random.Generator, dim: int) -> np.ndarray:
        scale = np.broadcast_to(np.asarray(self.scale, dtype=float), (dim,))
        if self.family == "normal":
            return rng.standard_normal(dim) * scale
        if self.family == "uniform":
            return rng.uniform(-1.0, 1.0, dim) * scale
        return np.zeros(dim)

    def std(self, dim: int) -> np.ndarray:
        """Per-coordinate standard deviation implied by the descriptor."""
        scale = np.broadcast_to(np.asarray(self.scale, dtype=float), (dim,))
        if self.family == "normal":
            return scale.copy()
        if self.family == "uniform":
            return scale / np.sqrt(3.0)
        return np.zeros(dim)


@dataclass(eq=False)
class SystemModel:
    """A simulatable system together with its regression layout.

    ``true_theta`` has shape (target_dim, n_phi).  ``noise_std`` is the
    disturbance scale in the system's native units (acceleration for the
    physical systems); ``noise_gain`` maps it into target units (``dt`` for
    Euler-discretized residuals, 1 when targets are next states), so the
    target-space noise level is ``noise_gain * noise_std``.

    ``apply_update(x, u, y) -> x_next`` advances the full physical state given
    the realized regression target ``y``; it is the inverse of the target
    layout, which keeps simulation and regression consistent by construction.
    """

    name: str
    feature_map: FeatureMap
    true_theta: np.ndarray
    noise_std: float
    input_spec: NoiseSpec
    x0_spec: NoiseSpec
    dt: float
    policy: Optional[Callable[[np.ndarray], np.ndarray]]
    apply_update: Callable[[np.ndarray, np.ndarray, np.ndarray], np.ndarray]
    make_directions: Callable[
        [np.random.Generator], tuple[np.ndarray, np.ndarray, Optional[tuple[int, ...]]]
    ]
    noise_gain: float = 1.0
    state_bound: float = 1e6
    x0_transform: Optional[Callable[[np.ndarray], np.ndarray]] = None

    def __post_init__(self) -> None:
        self.true_theta = np.asarray(self.true_theta, dtype=float)
        if self.true_theta.ndim != 2 or self.true_theta.shape[1] != self.feature_map.n_phi:
            raise ConfigError(
                f"true_theta shape {self.true_theta.shape} does not match "
                f"n_phi={self.feature_map.n_phi}"
            )
        if not np.all(np.isfinite(self.true_theta)):
            raise ConfigError("true_theta entries must be finite")
        if self.noise_std < 0:
            raise ConfigError("noise_std must be non-negative")
        if self.dt <= 0:
            raise ConfigError("dt must be positive")

    @property
    def target_dim(self) -> int:
        return self.true_theta.shape[0]

    @property
    def n_phi(self) -> int:
        return self.feature_map.n_phi

    @property
    def n_u(self) -> int:
        return self.feature_map.n_u

    @property
    def phys_dim(self) -> int:
        return self.feature_map.n_x

    @property
    def target_noise_std(self) -> float:
        """Disturbance standard deviation in target units (sigma_w of the bound)."""
        return self.noise_gain * self.noise_std

    def with_theta(self, theta: np.ndarray) -> "SystemModel":
        """A copy of this system with a different true parameter matrix."""
        return replace(self, true_theta=np.asarray(theta, dtype=float))


@dataclass(eq=False)
class TrajectoryBatch:
    """Column-stacked regression data from N trajectories of length T.

    ``features`` is n_phi x (N*T) and ``targets`` is target_dim x (N*T);
    column j of ``targets`` was produced from column j of ``features`` by the
    owning system.  Trajectory j occupies the contiguous column block
    [j*T, (j+1)*T).
    """

    features: np.ndarray
    targets: np.ndarray
    n_traj: int
    traj_len: int

    def __post_init__(self) -> None:
        self.features = np.asarray(self.features, dtype=float)
        self.targets = np.asarray(self.targets, dtype=float)
        n_cols = self.n_traj * self.traj_len
        if self.features.ndim != 2 or self.targets.ndim != 2:
            raise ConfigError("features and targets must be matrices")
        if self.features.shape[1] != n_cols or self.targets.shape[1] != n_cols:
            raise ConfigError(
                f"expected {n_cols} columns (N={self.n_traj}, T={self.traj_len}), got "
                f"features {self.features.shape[1]} / targets {self.targets.shape[1]}"
            )

    @property
    def n_samples(self) -> int:
        return self.features.shape[1]

    @property
    def n_phi(self) -> int:
        return self.features.shape[0]

    @property
    def target_dim(self) -> int:
        return self.targets.shape[0]


@dataclass(eq=False)
class HeterogeneitySpec:
    """Shared perturbation structure for a client fleet.

    Client i's parameter matrix is ``theta0 + g1_i * direction_v + g2_i *
    direction_u`` with g1, g2 drawn i.i.d. Uniform(0, epsilon).  Directions
    are expressed in parameter-matrix coordinates (they already absorb any
    discretization factors), are shared by the whole fleet, and give the
    pairwise spread bound

        max_{i,j} ||theta_i - theta_j||_2 <= epsilon * (||V||_2 + ||U||_2).

    ``which_params`` optionally names the distinct physical parameters the
    perturbation touches (used by structured systems that perturb only one).
    """

    epsilon: float
    direction_v: np.ndarray
    direction_u: np.ndarray
    which_params: Optional[tuple[int, ...]] = None

    def __post_init__(self) -> None:
        if self.epsilon < 0:
            raise ConfigError("epsilon must be non-negative")
        self.direction_v = np.asarray(self.direction_v, dtype=float)
        self.direction_u = np.asarray(self.direction_u, dtype=float)
        if self.direction_v.shape != self.direction_u.shape:
            raise ConfigError(
                f"direction shapes differ: {self.direction_v.shape} vs "
                f"{self.direction_u.shape}"
            )

    @property
    def spread_constant(self) -> float:
        """Spectral-norm constant c with max pairwise spread <= epsilon * c."""
        return float(
            np.linalg.norm(self.direction_v, 2) + np.linalg.norm(self.direction_u, 2)
        )


def make_heterogeneity(base: SystemModel, epsilon: float, seed: int) -> HeterogeneitySpec:
    """Draw the fleet-wide perturbation directions for ``base``.

    Directions come from their own seed substream so that sweeping any other
    experiment knob leaves them untouched.
    """
    if epsilon < 0:
        raise ConfigError("epsilon must be non-negative")
    rng = substream(*as_key(seed), SEED_HETEROGENEITY)
    direction_v, direction_u, which = base.make_directions(rng)
    return HeterogeneitySpec(epsilon, direction_v, direction_u, which)


def make_client_fleet(
    base: SystemModel, het: HeterogeneitySpec, M: int, seed: int
) -> list[SystemModel]:
    """Return M systems sharing ``base``'s dynamics with perturbed parameters.

    Client i's perturbation scalars are ``epsilon`` times two Uniform(0, 1)
    draws from the substream keyed by (seed, fleet tag, i), so the fleet is
    prefix-stable: growing M appends clients without changing existing ones,
    and sweeping epsilon rescales every client's offset along fixed rays.
    """
    if M < 1:
        raise ConfigError(f"fleet size must be at least 1, got {M}")
    if het.direction_v.shape != base.true_theta.shape:
        raise ConfigError(
            f"direction shape {het.direction_v.shape} does not match "
            f"parameter shape {base.true_theta.shape}"
        )
    key = as_key(seed)
    fleet = []
    for i in range(M):
        draws = substream(*key, SEED_FLEET, i).random(2)
        gamma1 = het.epsilon * draws[0]
        gamma2 = het.epsilon * draws[1]
        theta_i = base.true_theta + gamma1 * het.direction_v + gamma2 * het.direction_u
        fleet.append(base.with_theta(theta_i))
    return fleet


def simulate_batch(
    sys: SystemModel, n_traj: int, traj_len: int, seed: Union[int, Sequence[int]]
) -> TrajectoryBatch:
    """Roll out ``n_traj`` independent trajectories of ``traj_len`` steps.

    Each trajectory j consumes its own substream keyed by (seed, data tag, j),
    drawing in a frozen order: initial state first, then per step the input
    dither followed by the process noise.  Serial and parallel generation
    therefore agree, and trajectory j is identical no matter how many others
    are requested.  The data tag keeps trajectory indices out of the position
    reserved for structural tags, so a large j can never alias the streams
    that drew the system or the fleet.

    Raises SimulationDiverged if any state entry leaves the system's bound.
    """
    if n_traj < 1 or traj_len < 1:
        raise ConfigError(f"need n_traj >= 1 and traj_len >= 1, got {n_traj}, {traj_len}")
    key = as_key(seed)
    n_cols = n_traj * traj_len
    features = np.empty((sys.n_phi, n_cols))
    targets = np.empty((sys.target_dim, n_cols))
    for j in range(n_traj):
        rng = substream(*key, SEED_DATA, j)
        x = sys.x0_spec.sample(rng, sys.phys_dim)
        if sys.x0_transform is not None:
            x = sys.x0_transform(x)
        for t in range(traj_len):
            dither = sys.input_spec.sample(rng, sys.n_u)
            noise = rng.standard_normal(sys.target_dim) * sys.noise_std
            u = dither if sys.policy is None else sys.policy(x) + dither
            phi = sys.feature_map.eval(x, u)
            y = sys.true_theta @ phi + sys.noise_gain * noise
            col = j * traj_len + t
            features[:, col] = phi
            targets[:, col] = y
            x = sys.apply_update(x, u, y)
            max_abs = float(np.max(np.abs(x)))
            if not np.isfinite(max_abs) or max_abs > sys.state_bound:
                raise SimulationDiverged(j, t, max_abs)
    return TrajectoryBatch(features, targets, n_traj, traj_len)


def simulate_fleet(
    fleet: Sequence[SystemModel], n_traj: int, traj_len: int, seed: int
) -> list[TrajectoryBatch]:
    """Simulate every client on its own data substream keyed by client index."""
    key = as_key(seed)
    return [
        simulate_batch(client, n_traj, traj_len, (*key, SEED_DATA, i))
        for i, client in enumerate(fleet)
    ]


def merge_batches(batches: Sequence[TrajectoryBatch]) -> TrajectoryBatch:
    """Concatenate client batches column-wise into one pooled batch."""
    if not batches:
        raise ConfigError("need at least one batch to merge")
    traj_lens = {b.traj_len for b in batches}
    if len(traj_lens) != 1:
        raise ConfigError(f"batches disagree on trajectory length: {sorted(traj_lens)}")
    return TrajectoryBatch(
        features=np.hstack([b.features for b in batches]),
        targets=np.hstack([b.targets for b in batches]),
        n_traj=sum(b.n_traj for b in batches),
        traj_len=batches[0].traj_len,
    )


# ---------------------------------------------------------------------------
# Synthetic benchmark: x_{t+1} = A sin(x_t) + B u_t + w_t
# ---------------------------------------------------------------------------


def make_synthetic_system(
    n_x: int = 3,
    n_u: int = 2,
    seed: int = 0,
    noise_std: float = 1.0,
    input_std: float = 1.0,
    x0_std: float = 1.0,
) -> SystemModel:
    """Open-loop synthetic benchmark with element-wise sine state features.

    The nominal (A0, B0) are drawn once from the seeded standard normal and
    held fixed; theta* = [A0, B0] acts on phi(x, u) = [sin(x); u], and the
    regression targets are the next states themselves.  Initial states,
    inputs, and disturbances default to zero-mean unit-standard-deviation
    normals.
    """
    if n_x < 1 or n_u < 1:
        raise ConfigError(f"need n_x >= 1 and n_u >= 1, got n_x={n_x}, n_u={n_u}")
    rng = substream(*as_key(seed), SEED_SYSTEM)
    a0 = rng.standard_normal((n_x, n_x))
    b0 = rng.standard_normal((n_x, n_u))
    theta = np.hstack([a0, b0])

    feature_map = FeatureMap(
        n_x=n_x,
        n_u=n_u,
        n_phi=n_x + n_u,
        eval=lambda x, u: np.concatenate([np.sin(x), u]),
        term_kinds=("sine",) * n_x + ("linear",) * n_u,
    )

    def directions(drng: np.random.Generator):
        v_block = drng.standard_normal((n_x, n_x))
        v_block /= np.linalg.norm(v_block)
        u_block = drng.standard_normal((n_x, n_u))
        u_block /= np.linalg.norm(u_block)
        direction_v = np.hstack([v_block, np.zeros((n_x, n_u))])
        direction_u = np.hstack([np.zeros((n_x, n_x)), u_block])
        return direction_v, direction_u, None

    return SystemModel(
        name="synthetic",
        feature_map=feature_map,
        true_theta=theta,
        noise_std=noise_std,
        input_spec=NoiseSpec("normal", input_std),
        x0_spec=NoiseSpec("normal", x0_std),
        dt=1.0,
        policy=None,
        apply_update=lambda x, u, y: y,
        make_directions=directions,
        noise_gain=1.0,
    )


# ---------------------------------------------------------------------------
# Pendulum: alpha_ddot = -A g sin(alpha) + B u + w,  A = 1/l, B = 1/(m l^2)
# ---------------------------------------------------------------------------


def make_pendulum_system(
    mass: float = 1.0,
    length: float = 1.0,
    dt: float = 0.1,
    policy_gains: tuple[float, float] = (2.0, 1.0),
    noise_std: float = 1.0,
    input_noise_max: float = 1.0,
    gravity: float = 9.81,
    x0_max: float = 0.3,
) -> SystemModel:
    """Torque-driven pendulum under a stabilizing PD policy with dither.

    State is (alpha, alpha_dot).  Forward-Euler discretization turns the
    angular-acceleration equation into the scalar residual

        y_t = alpha_dot_{t+1} - alpha_dot_t
            = [-dt*g/l, dt/(m l^2)] . [sin(alpha_t); u_t] + dt*w_t,

    so the unknown row is theta* = [-dt*g*A0, dt*B0] with A0 = 1/l and
    B0 = 1/(m l^2); the kinematic angle row is known exactly and excluded
    from the regression.  The input is u = -k_p*alpha - k_d*alpha_dot + eta
    with eta ~ Uniform(-input_noise_max, input_noise_max).
    """
    if mass <= 0 or length <= 0 or dt <= 0:
        raise ConfigError(
            f"mass, length, dt must be positive, got {mass}, {length}, {dt}"
        )
    if gravity <= 0:
        raise ConfigError(f"gravity must be positive, got {gravity}")
    a0 = 1.0 / length
    b0 = 1.0 / (mass * length**2)
    theta = np.array([[-dt * gravity * a0, dt * b0]])
    k_p, k_d = policy_gains

    feature_map = FeatureMap(
        n_x=2,
        n_u=1,
        n_phi=2,
        eval=lambda x, u: np.array([np.sin(x[0]), u[0]]),
        term_kinds=("sine", "linear"),
    )

    def apply(x: np.ndarray, u: np.ndarray, y: np.ndarray) -> np.ndarray:
        return np.array([x[0] + dt * x[1], x[1] + y[0]])

    def directions(drng: np.random.Generator):
        # Physical perturbations enter A and B; map them through the same
        # factors the nominal parameters carry into the regression row.
        v_phys = drng.standard_normal((1, 1))
        v_phys /= np.linalg.norm(v_phys)
        u_phys = drng.standard_normal((1, 1))
        u_phys /= np.linalg.norm(u_phys)
        direction_v = np.array([[-dt * gravity * v_phys[0, 0], 0.0]])
        direction_u = np.array([[0.0, dt * u_phys[0, 0]]])
        return direction_v, direction_u, None

    return SystemModel(
        name="pendulum",
        feature_map=feature_map,
        true_theta=theta,
        noise_std=noise_std,
        input_spec=NoiseSpec("uniform", input_noise_max),
        x0_spec=NoiseSpec("uniform", x0_max),
        dt=dt,
        policy=lambda x: np.array([-k_p * x[0] - k_d * x[1]]),
        apply_update=apply,
        make_directions=directions,
        noise_gain=dt,
    )


# ---------------------------------------------------------------------------
# Quadrotor: 13 states (position, velocity, attitude quaternion, body rates),
# 4 inputs (collective thrust, body torques), 7 distinct unknown parameters.
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class QuadrotorGains:
    """Hover PD gains: altitude (k_p_z, k_d_z) and attitude (k_q, k_omega)."""

    k_p_z: float = 4.0
    k_d_z: float = 2.0
    k_q: float = 8.0
    k_omega: float = 2.0


def rotation_matrix(q: np.ndarray) -> np.ndarray:
    """Body-to-world rotation matrix of a unit quaternion (w, x, y, z)."""
    w, x, y, z = q
    return np.array(
        [
            [1 - 2 * (y * y + z * z), 2 * (x * y - w * z), 2 * (x * z + w * y)],
            [2 * (x * y + w * z), 1 - 2 * (x * x + z * z), 2 * (y * z - w * x)],
            [2 * (x * z - w * y), 2 * (y * z + w * x), 1 - 2 * (x * x + y * y)],
        ]
    )


def quaternion_rate(q: np.ndarray, omega: np.ndarray) -> np.ndarray:
    """Kinematics q_dot = (1/2) q (x) (0, omega) for body rates omega."""
    w, x, y, z = q
    ox, oy, oz = omega
    return 0.5 * np.array(
        [
            -x * ox - y * oy - z * oz,
            w * ox + y * oz - z * oy,
            w * oy + z * ox - x * oz,
            w * oz + x * oy - y * ox,
        ]
    )


def make_quadrotor_system(
    mass: float = 1.0,
    inertia: tuple[float, float, float] = (0.010, 0.012, 0.020),
    dt: float = 0.01,
    controller_gains: QuadrotorGains = QuadrotorGains(),
    noise_std: float = 0.1,
    input_noise: tuple[float, float, float, float] = (0.5, 0.02, 0.02, 0.02),
    gravity: float = 9.81,
) -> SystemModel:
    """Quadrotor with thrust/torque inputs regressed on its rate residuals.

    State layout: x = [p (3), v (3), q (4, scalar-first unit quaternion),
    omega (3, body rates)].  Inputs are collective thrust f and body torques
    tau.  With diagonal inertia (Ixx, Iyy, Izz), the Euler-discretized
    velocity and body-rate updates are linear in seven physical parameters

        t1 = 1/m,  t2 = 1/Ixx,  t3 = (Iyy - Izz)/Ixx,
        t4 = 1/Iyy, t5 = (Izz - Ixx)/Iyy,
        t6 = 1/Izz, t7 = (Ixx - Iyy)/Izz,

    against the features

        phi = [f*(R e3)_x, f*(R e3)_y, f*(R e3)_z,
               tau_x, tau_y, tau_z,
               omega_y*omega_z, omega_z*omega_x, omega_x*omega_y],

    where R is the attitude rotation.  Targets are the six rows
    [v_{t+1} - v_t + g*dt*e3 ; omega_{t+1} - omega_t], making theta* the
    6 x 9 matrix of dt-scaled parameters (t1 on the three velocity rows; the
    torque and gyroscopic terms on the rate rows).  Gravity is known and
    removed from the target, so the identity target = theta*.phi holds
    exactly in the noise-free case.

    Quaternion kinematics q_dot = (1/2) Omega q are integrated by forward
    Euler with renormalization every step.  The policy is a hover PD law:
    thrust m*(g - k_p_z*p_z - k_d_z*v_z) plus attitude/rate damping torques.
    Only the thrust-gain parameter t1 is heterogeneous across a fleet, with
    perturbation gamma entering as t1 = 1/m + gamma.
    """
    if mass <= 0 or any(i <= 0 for i in inertia):
        raise ConfigError(
            f"mass and inertias must be positive, got mass={mass}, inertia={inertia}"
        )
    if dt <= 0:
        raise ConfigError(f"dt must be positive, got {dt}")
    ixx, iyy, izz = inertia
    params = np.array(
        [
            1.0 / mass,
            1.0 / ixx,
            (iyy - izz) / ixx,
            1.0 / iyy,
            (izz - ixx) / iyy,
            1.0 / izz,
            (ixx - iyy) / izz,
        ]
    )
    theta = np.zeros((6, 9))
    theta[0, 0] = theta[1, 1] = theta[2, 2] = dt * params[0]
    theta[3, 3] = dt * params[1]
    theta[3, 6] = dt * params[2]
    theta[4, 4] = dt * params[3]
    theta[4, 7] = dt * params[4]
    theta[5, 5] = dt * params[5]
    theta[5, 8] = dt * params[6]

    def phi(x: np.ndarray, u: np.ndarray) -> np.ndarray:
        thrust_axis = rotation_matrix(x[6:10])[:, 2]
        f = u[0]
        omega = x[10:13]
        return np.array(
            [
                f * thrust_axis[0],
                f * thrust_axis[1],
                f * thrust_axis[2],
                u[1],
                u[2],
                u[3],
                omega[1] * omega[2],
                omega[2] * omega[0],
                omega[0] * omega[1],
            ]
        )

    feature_map = FeatureMap(
        n_x=13,
        n_u=4,
        n_phi=9,
        eval=phi,
        term_kinds=("product",) * 3 + ("linear",) * 3 + ("product",) * 3,
    )

    gains = controller_gains

    def policy(x: np.ndarray) -> np.ndarray:
        thrust = mass * (gravity - gains.k_p_z * x[2] - gains.k_d_z * x[5])
        torque = -gains.k_q * x[7:10] * np.sign(x[6]) - gains.k_omega * x[10:13]
        return np.concatenate([[thrust], torque])

    def apply(x: np.ndarray, u: np.ndarray, y: np.ndarray) -> np.ndarray:
        nxt = np.empty(13)
        nxt[0:3] = x[0:3] + dt * x[3:6]
        nxt[3:6] = x[3:6] + y[0:3]
        nxt[5] -= gravity * dt
        q = x[6:10] + dt * quaternion_rate(x[6:10], x[10:13])
        nxt[6:10] = q / np.linalg.norm(q)
        nxt[10:13] = x[10:13] + y[3:6]
        return nxt

    def fix_x0(x: np.ndarray) -> np.ndarray:
        q = np.array([1.0 + x[6], x[7], x[8], x[9]])
        x[6:10] = q / np.linalg.norm(q)
        return x

    def directions(_drng: np.random.Generator):
        # Heterogeneity enters only the thrust gain t1 = 1/m + gamma, which
        # occupies the three diagonal velocity-row slots scaled by dt.
        direction_v = np.zeros((6, 9))
        direction_v[0, 0] = direction_v[1, 1] = direction_v[2, 2] = dt
        return direction_v, np.zeros((6, 9)), (0,)

    return SystemModel(
        name="quadrotor",
        feature_map=feature_map,
        true_theta=theta,
        noise_std=noise_std,
        input_spec=NoiseSpec("uniform", input_noise),
        x0_spec=NoiseSpec(
            "uniform",
            (0.0, 0.0, 0.0, 0.2, 0.2, 0.2, 0.0, 0.1, 0.1, 0.1, 0.2, 0.2, 0.2),
        ),
        dt=dt,
        policy=policy,
        apply_update=apply,
        make_directions=directions,
        noise_gain=dt,
        x0_transform=fix_x0,
    )


SYSTEM_BUILDERS: dict[str, Callable[..., SystemModel]] = {
    "synthetic": make_synthetic_system,
    "pendulum": make_pendulum_system,
    "quadrotor": make_quadrotor_system,
}
