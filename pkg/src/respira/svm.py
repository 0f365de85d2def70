"""Kernel SVM trained from scratch by pairwise dual coordinate optimization.

Supports the linear kernel x.z, the RBF kernel exp(-gamma*||x-z||^2) and
the quadratic polynomial kernel (x.z + coef0)^2. The soft-margin dual is
solved by a sequential two-variable scheme: sweep the training set, give
every multiplier that violates its optimality condition a closed-form,
box-clipped update against a seeded-random partner, and recompute the bias
from the margin conditions after each sweep. Training ends when a full
sweep finds no violation, so the returned model satisfies the optimality
conditions at the configured tolerance.
"""

import math
from dataclasses import dataclass

import numpy as np
from sklearn.base import BaseEstimator, ClassifierMixin

from .dataset import ABNORMAL, NORMAL, Standardizer, _atomic_write
from .validation import as_float_matrix, check_seed

KERNEL_KINDS = ("linear", "rbf", "quadratic")

# Multipliers this close to the box edges are numerically 0 or C; snapping
# during optimization keeps dust out of the free set and stabilizes the
# support-vector count across platforms.
_ALPHA_SNAP = 1e-12
# Candidate partners drawn per update; the largest margin gap wins.
_PARTNER_BATCH = 16
# Updates a single violating multiplier may receive per sweep.
_UPDATE_ROUNDS = 4
# Give up after this many total sweeps without reaching the stop rule.
_HARD_PASS_CAP = 20_000


class ConvergenceError(RuntimeError):
    """Training failed to converge; carries the number of completed passes."""

    def __init__(self, message, passes):
        super().__init__(message)
        self.passes = passes


@dataclass(frozen=True)
class KernelSpec:
    """A kernel family plus its hyperparameters.

    gamma applies to the RBF kernel only, coef0 to the quadratic kernel only.
    """

    kind: str
    gamma: float | None = None
    coef0: float | None = None

    def __post_init__(self):
        if self.kind not in KERNEL_KINDS:
            raise ValueError(f"unknown kernel {self.kind!r}; choose from {KERNEL_KINDS}")
        if self.kind == "rbf":
            if self.gamma is None or not (math.isfinite(self.gamma) and self.gamma > 0):
                raise ValueError("rbf kernel needs gamma > 0")
        if self.kind == "quadratic":
            if self.coef0 is None or not math.isfinite(self.coef0):
                raise ValueError("quadratic kernel needs a finite coef0")


def kernel_eval(spec, x, z):
    """Kernel value for a single pair of vectors."""
    x = np.asarray(x, dtype=np.float64)
    z = np.asarray(z, dtype=np.float64)
    if x.shape != z.shape or x.ndim != 1:
        raise ValueError(f"dimension mismatch: {x.shape} vs {z.shape}")
    if spec.kind == "linear":
        return float(x @ z)
    if spec.kind == "rbf":
        diff = x - z
        return float(np.exp(-spec.gamma * (diff @ diff)))
    return float((x @ z + spec.coef0) ** 2)


def gram_matrix(spec, vectors, others=None):
    """Pairwise kernel matrix K[i, j] = k(vectors[i], others[j]).

    With ``others`` omitted the result is the symmetric Gram matrix of
    ``vectors`` with itself.
    """
    X = as_float_matrix(vectors, "vectors")
    Z = X if others is None else as_float_matrix(others, "others")
    if X.shape[1] != Z.shape[1]:
        raise ValueError(f"dimension mismatch: {X.shape[1]} vs {Z.shape[1]}")
    dots = X @ Z.T
    if spec.kind == "linear":
        return dots
    if spec.kind == "rbf":
        sq = (X * X).sum(axis=1)[:, None] + (Z * Z).sum(axis=1)[None, :] - 2.0 * dots
        np.maximum(sq, 0.0, out=sq)
        return np.exp(-spec.gamma * sq)
    return (dots + spec.coef0) ** 2


@dataclass
class KktViolation:
    """One training point whose margin breaks its optimality condition."""

    index: int
    alpha: float
    margin: float
    condition: str


def _violates(alpha_i, margin_minus_one, c, tol):
    return (margin_minus_one < -tol and alpha_i < c) or (
        margin_minus_one > tol and alpha_i > 0.0
    )


def _pair_update(K, y, alpha, g, c, i, j):
    """Closed-form ascent on the (alpha_i, alpha_j) subproblem, clipped to the
    box. Returns True when the multipliers moved. ``g`` is the bias-free part
    of the decision values and is kept consistent in place."""
    if y[i] != y[j]:
        low = max(0.0, alpha[j] - alpha[i])
        high = min(c, c + alpha[j] - alpha[i])
    else:
        low = max(0.0, alpha[i] + alpha[j] - c)
        high = min(c, alpha[i] + alpha[j])
    if low == high:
        return False
    eta = 2.0 * K[i, j] - K[i, i] - K[j, j]
    gap = (g[i] - y[i]) - (g[j] - y[j])
    if eta < 0.0:
        a_j = min(high, max(low, alpha[j] - y[j] * gap / eta))
    else:
        # coincident points in kernel space: the subproblem is linear in
        # alpha_j, so the optimum sits at a box endpoint
        slope = y[j] * gap
        if slope > 0.0:
            a_j = high
        elif slope < 0.0:
            a_j = low
        else:
            return False
    if a_j < _ALPHA_SNAP:
        a_j = 0.0
    elif a_j > c - _ALPHA_SNAP:
        a_j = c
    d_j = a_j - alpha[j]
    if abs(d_j) < _ALPHA_SNAP:
        return False
    a_i = alpha[i] + y[i] * y[j] * (alpha[j] - a_j)
    if a_i < _ALPHA_SNAP:
        a_i = 0.0
    elif a_i > c - _ALPHA_SNAP:
        a_i = c
    d_i = a_i - alpha[i]
    g += y[i] * d_i * K[i, :] + y[j] * d_j * K[j, :]
    alpha[i] = a_i
    alpha[j] = a_j
    return True


def _margin_bias(alpha, g, y, c):
    """Bias making the margin conditions hold best for the current
    multipliers: the mean over free support vectors of (y_i - g_i), or the
    midpoint of the feasible interval implied by the bound points."""
    free = (alpha > 0.0) & (alpha < c)
    if free.any():
        return float((y[free] - g[free]).mean())
    at_zero = alpha == 0.0
    at_c = alpha == c
    pos = y > 0
    lower = np.concatenate([1.0 - g[at_zero & pos], -1.0 - g[at_c & ~pos]])
    upper = np.concatenate([-1.0 - g[at_zero & ~pos], 1.0 - g[at_c & pos]])
    if lower.size == 0 and upper.size == 0:
        return 0.0
    if lower.size == 0:
        return float(upper.min())
    if upper.size == 0:
        return float(lower.max())
    return float(0.5 * (lower.max() + upper.min()))


def _smo(K, y, c, tol, max_passes, seed):
    """Pairwise dual ascent on a precomputed Gram matrix.

    Sweeps the training set; every multiplier violating its optimality
    condition gets up to a few two-variable updates, each against the
    seeded-random candidate partner with the largest margin gap (the pair
    step itself is bias-free, so the bias stays frozen within a sweep and is
    recomputed from the margin conditions afterwards). Returns
    (alpha, bias, passes) once a full sweep finds no violation; raises
    ConvergenceError when ``max_passes`` consecutive sweeps make no update
    while violations persist, or at the hard sweep cap.
    """
    n = K.shape[0]
    rng = np.random.default_rng(seed)
    alpha = np.zeros(n)
    b = 0.0
    g = np.zeros(n)  # decision values minus bias, kept incrementally

    passes = 0
    idle = 0
    while True:
        passes += 1
        if passes > _HARD_PASS_CAP:
            raise ConvergenceError(
                f"no convergence within {_HARD_PASS_CAP} passes", passes=passes - 1
            )
        changed = 0
        violations = 0
        for i in range(n):
            if not _violates(alpha[i], y[i] * (g[i] + b - y[i]), c, tol):
                continue
            violations += 1
            for _ in range(_UPDATE_ROUNDS):
                cand = rng.integers(n - 1, size=_PARTNER_BATCH)
                cand = cand + (cand >= i)
                gaps = np.abs((g[i] - y[i]) - (g[cand] - y[cand]))
                moved = False
                for pick in np.argsort(-gaps):
                    if _pair_update(K, y, alpha, g, c, i, int(cand[pick])):
                        changed += 1
                        moved = True
                        break
                if not moved:
                    break
                if not _violates(alpha[i], y[i] * (g[i] + b - y[i]), c, tol):
                    break

        if violations == 0:
            return alpha, b, passes
        b = _margin_bias(alpha, g, y, c)
        idle = idle + 1 if changed == 0 else 0
        if idle >= max_passes:
            raise ConvergenceError(
                f"{violations} unresolved optimality violations after "
                f"{max_passes} consecutive passes without an update",
                passes=passes,
            )


class KernelSvm(ClassifierMixin, BaseEstimator):
    """Binary soft-margin kernel SVM with a deterministic seeded solver.

    Parameters
    ----------
    kernel : {'linear', 'rbf', 'quadratic'}
        Kernel family.
    c : float
        Box constraint C on the dual multipliers.
    gamma : float or None
        RBF width; None picks 1 / (n_features * mean per-feature variance).
    coef0 : float
        Additive constant of the quadratic kernel.
    tol : float
        Optimality tolerance on the functional margins.
    max_passes : int
        Consecutive update-free sweeps tolerated before giving up.
    seed : int
        Seed for the solver's random partner choice.

    The fitted decision function is f(x) = sum_i a_i y_i k(x_i, x) + b over
    the support vectors (a_i > 0). Labels may be given as the strings
    'normal'/'abnormal' (abnormal is the positive class) or as -1/+1.
    A decision value of exactly 0 predicts the negative class.
    """

    def __init__(self, kernel="quadratic", c=1.0, gamma=None, coef0=1.0,
                 tol=1e-3, max_passes=50, seed=0):
        self.kernel = kernel
        self.c = c
        self.gamma = gamma
        self.coef0 = coef0
        self.tol = tol
        self.max_passes = max_passes
        self.seed = seed

    def _resolve_spec(self, X):
        if self.kernel not in KERNEL_KINDS:
            raise ValueError(f"unknown kernel {self.kernel!r}; choose from {KERNEL_KINDS}")
        gamma = self.gamma
        if self.kernel == "rbf" and gamma is None:
            mean_var = X.var(axis=0).mean()
            gamma = 1.0 / (X.shape[1] * mean_var) if mean_var > 0 else 1.0 / X.shape[1]
        coef0 = self.coef0 if self.kernel == "quadratic" else None
        return KernelSpec(self.kernel, gamma=gamma if self.kernel == "rbf" else None,
                          coef0=coef0)

    def _signed_targets(self, y):
        values = sorted(set(y))
        if values == [NORMAL] or values == [ABNORMAL] or len(values) == 1:
            raise ValueError("training data must contain both classes")
        if values == [ABNORMAL, NORMAL]:
            negative, positive = NORMAL, ABNORMAL
        elif values == [-1, 1] or values == [-1.0, 1.0]:
            negative, positive = -1, 1
        else:
            raise ValueError(
                f"labels must be 'normal'/'abnormal' or -1/+1, got {values!r}"
            )
        signed = np.where(np.asarray(y) == positive, 1.0, -1.0)
        return signed, negative, positive

    def fit(self, X, y):
        X = as_float_matrix(X)
        y = list(y)
        if len(y) != X.shape[0]:
            raise ValueError(f"X has {X.shape[0]} rows but y has {len(y)} labels")
        if not (math.isfinite(self.c) and self.c > 0):
            raise ValueError("c must be a positive finite number")
        if not (math.isfinite(self.tol) and self.tol > 0):
            raise ValueError("tol must be positive")
        if not (isinstance(self.max_passes, int) and self.max_passes >= 1):
            raise ValueError("max_passes must be an integer >= 1")
        check_seed(self.seed)

        signed, negative, positive = self._signed_targets(y)
        spec = self._resolve_spec(X)
        K = gram_matrix(spec, X)
        alpha, bias, passes = _smo(K, signed, float(self.c), float(self.tol),
                                   self.max_passes, self.seed)
        alpha[alpha < _ALPHA_SNAP] = 0.0
        support = np.nonzero(alpha > 0.0)[0]

        self.kernel_spec_ = spec
        self.classes_ = np.array([negative, positive])
        self.support_idx_ = support
        self.support_vectors_ = X[support].copy()
        self.dual_coef_ = (alpha * signed)[support]
        self.intercept_ = float(bias)
        self.n_features_in_ = X.shape[1]
        self.n_iter_ = passes
        self.standardizer_ = None
        return self

    def decision_function(self, X):
        """f(x) = sum_i dual_coef_i * k(sv_i, x) + bias. Accepts a single
        vector (returns a scalar) or a matrix (returns a vector)."""
        single = np.asarray(X).ndim == 1
        X = as_float_matrix(X)
        if X.shape[1] != self.n_features_in_:
            raise ValueError(f"expected {self.n_features_in_} features, got {X.shape[1]}")
        if self.dual_coef_.size == 0:
            values = np.full(X.shape[0], self.intercept_)
        else:
            cross = gram_matrix(self.kernel_spec_, self.support_vectors_, X)
            values = self.dual_coef_ @ cross + self.intercept_
        return float(values[0]) if single else values

    def predict(self, X):
        """Positive class where the decision value is > 0, negative otherwise
        (ties at exactly 0 go to the negative class)."""
        values = np.atleast_1d(self.decision_function(X))
        labels = np.where(values > 0.0, self.classes_[1], self.classes_[0])
        return labels[0] if np.asarray(X).ndim == 1 else labels

    @property
    def n_support_(self):
        """Number of stored support vectors (nonzero multipliers)."""
        return int(np.count_nonzero(self.dual_coef_))

    @property
    def coef_(self):
        """Primal weight vector sum_i a_i y_i x_i; linear kernel only."""
        if self.kernel_spec_.kind != "linear":
            raise AttributeError("coef_ is only defined for the linear kernel")
        return self.dual_coef_ @ self.support_vectors_

    def dual_objective(self, X, y):
        """Dual objective W(a) = sum a_i - 1/2 sum a_i a_j y_i y_j K_ij of the
        fitted multipliers, evaluated on the training data."""
        X = as_float_matrix(X)
        signed, _, _ = self._signed_targets(list(y))
        alpha = np.zeros(X.shape[0])
        alpha[self.support_idx_] = np.abs(self.dual_coef_)
        coef = alpha * signed
        K = gram_matrix(self.kernel_spec_, X)
        return float(alpha.sum() - 0.5 * coef @ K @ coef)

    def kkt_report(self, X, y, tol=None):
        """Optimality violations over the training set (X, y must be the data
        the model was fitted on, in the same order).

        Checks, per point: a = 0 requires y*f >= 1 - tol; 0 < a < C requires
        |y*f - 1| <= tol; a = C requires y*f <= 1 + tol. Returns the
        offenders with their margins; an empty list means convergence held.
        """
        tol = self.tol if tol is None else tol
        X = as_float_matrix(X)
        signed, _, _ = self._signed_targets(list(y))
        if X.shape[0] != signed.size:
            raise ValueError("X and y lengths differ")
        alpha = np.zeros(X.shape[0])
        alpha[self.support_idx_] = np.abs(self.dual_coef_)
        margins = signed * self.decision_function(X)
        violations = []
        for i, (a, m) in enumerate(zip(alpha, margins)):
            if a == 0.0 and m < 1.0 - tol:
                violations.append(KktViolation(i, float(a), float(m), "alpha=0: y*f >= 1"))
            elif 0.0 < a < self.c and abs(m - 1.0) > tol:
                violations.append(KktViolation(i, float(a), float(m), "0<alpha<C: y*f == 1"))
            elif a >= self.c and m > 1.0 + tol:
                violations.append(KktViolation(i, float(a), float(m), "alpha=C: y*f <= 1"))
        return violations


def _fmt(x):
    return f"{x:.17g}"


class ModelFormatError(ValueError):
    """Raised for malformed model files; messages cite line numbers."""


def save_model(model, path):
    """Persist a fitted KernelSvm to a line-oriented text file.

    Layout: ``svm-model v1`` header, kernel line, bias, dimensions, one row
    per support vector (signed coefficient then features), then the
    standardizer's mean and scale rows. All reals carry 17 significant
    digits so reloading reproduces decision values bit for bit. A model
    without an attached standardizer is written with the identity transform.
    """
    spec = model.kernel_spec_
    if spec.kind == "rbf":
        kernel_line = f"kernel rbf gamma={_fmt(spec.gamma)}"
    elif spec.kind == "quadratic":
        kernel_line = f"kernel quadratic coef0={_fmt(spec.coef0)}"
    else:
        kernel_line = "kernel linear"

    d = model.n_features_in_
    std = model.standardizer_
    if std is None:
        std = Standardizer.identity(d)

    lines = [
        "svm-model v1",
        kernel_line,
        f"bias {_fmt(model.intercept_)}",
        f"dim {d} nsv {len(model.dual_coef_)}",
    ]
    for coef, sv in zip(model.dual_coef_, model.support_vectors_):
        lines.append(" ".join([_fmt(coef)] + [_fmt(v) for v in sv]))
    lines.append(" ".join(["mean"] + [_fmt(v) for v in std.mean_]))
    lines.append(" ".join(["scale"] + [_fmt(v) for v in std.scale_]))
    _atomic_write(path, "\n".join(lines) + "\n")


def _parse_floats(parts, lineno, expected, what):
    if len(parts) != expected:
        raise ModelFormatError(f"line {lineno}: expected {expected} {what} values, got {len(parts)}")
    try:
        return np.array([float(p) for p in parts], dtype=np.float64)
    except ValueError:
        raise ModelFormatError(f"line {lineno}: non-numeric {what} value") from None


def load_model(path):
    """Inverse of :func:`save_model`; returns a fitted KernelSvm.

    Loaded models classify 'normal'/'abnormal' and keep their train-time
    standardizer; the original training set is not stored, so kkt_report
    is unavailable on a loaded model.
    """
    with open(path, "r", encoding="utf-8") as fh:
        lines = fh.read().splitlines()

    def need(idx):
        if idx >= len(lines):
            raise ModelFormatError(f"line {idx + 1}: unexpected end of file")
        return lines[idx]

    header = need(0)
    if header != "svm-model v1":
        if header.startswith("svm-model"):
            raise ModelFormatError(f"unsupported model version {header.split(' ', 1)[1]!r}")
        raise ModelFormatError("line 1: expected header 'svm-model v1'")

    kparts = need(1).split()
    if not kparts or kparts[0] != "kernel" or len(kparts) < 2:
        raise ModelFormatError("line 2: expected 'kernel <kind> [param=value]'")
    kind = kparts[1]
    gamma = coef0 = None
    for extra in kparts[2:]:
        key, _, value = extra.partition("=")
        try:
            parsed = float(value)
        except ValueError:
            raise ModelFormatError(f"line 2: non-numeric kernel parameter {extra!r}") from None
        if key == "gamma":
            gamma = parsed
        elif key == "coef0":
            coef0 = parsed
        else:
            raise ModelFormatError(f"line 2: unknown kernel parameter {key!r}")
    try:
        spec = KernelSpec(kind, gamma=gamma, coef0=coef0)
    except ValueError as err:
        raise ModelFormatError(f"line 2: {err}") from None

    bparts = need(2).split()
    if len(bparts) != 2 or bparts[0] != "bias":
        raise ModelFormatError("line 3: expected 'bias <value>'")
    try:
        bias = float(bparts[1])
    except ValueError:
        raise ModelFormatError("line 3: non-numeric bias") from None

    dparts = need(3).split()
    if len(dparts) != 4 or dparts[0] != "dim" or dparts[2] != "nsv":
        raise ModelFormatError("line 4: expected 'dim <d> nsv <m>'")
    try:
        dim, nsv = int(dparts[1]), int(dparts[3])
    except ValueError:
        raise ModelFormatError("line 4: non-numeric dim/nsv") from None
    if dim < 1 or nsv < 0:
        raise ModelFormatError("line 4: dim must be >= 1 and nsv >= 0")

    coefs = np.zeros(nsv)
    vectors = np.zeros((nsv, dim))
    for row in range(nsv):
        lineno = 5 + row
        parts = need(lineno - 1).split()
        if parts and parts[0] in ("mean", "scale"):
            raise ModelFormatError(
                f"line {lineno}: expected {nsv} support-vector rows, found {parts[0]!r}"
            )
        values = _parse_floats(parts, lineno, dim + 1, "support-vector")
        coefs[row] = values[0]
        vectors[row] = values[1:]

    mean_lineno = 5 + nsv
    mparts = need(mean_lineno - 1).split()
    if not mparts or mparts[0] != "mean":
        raise ModelFormatError(f"line {mean_lineno}: expected 'mean <{dim} values>'")
    mean = _parse_floats(mparts[1:], mean_lineno, dim, "mean")
    sparts = need(mean_lineno).split()
    if not sparts or sparts[0] != "scale":
        raise ModelFormatError(f"line {mean_lineno + 1}: expected 'scale <{dim} values>'")
    scale = _parse_floats(sparts[1:], mean_lineno + 1, dim, "scale")

    model = KernelSvm(kernel=kind,
                      gamma=spec.gamma if kind == "rbf" else None,
                      coef0=spec.coef0 if kind == "quadratic" else 1.0)
    model.kernel_spec_ = spec
    model.classes_ = np.array([NORMAL, ABNORMAL])
    model.support_idx_ = None
    model.support_vectors_ = vectors
    model.dual_coef_ = coefs
    model.intercept_ = bias
    model.n_features_in_ = dim
    model.n_iter_ = 0
    model.standardizer_ = Standardizer.from_arrays(mean, scale)
    return model
