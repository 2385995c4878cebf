import numpy as np

from dmkde.errors import EigenSolverError, ParameterError


def round_robin_pairs(n):
    """Round-robin ordering of the index pairs of an n x n matrix.

    Every round holds floor(n / 2) disjoint pairs (p, q) with p < q and the
    n - 1 (or n when n is odd) rounds together visit each pair exactly once.
    Rotations inside a round touch disjoint rows and columns, so a whole round
    can be applied at once.
    """
    m = n + (n % 2)
    players = list(range(m))
    rounds = []
    for _ in range(m - 1):
        p, q = [], []
        for i in range(m // 2):
            a, b = players[i], players[m - 1 - i]
            if a >= n or b >= n:
                continue
            p.append(min(a, b))
            q.append(max(a, b))
        rounds.append((np.array(p, dtype=np.int64), np.array(q, dtype=np.int64)))
        players = [players[0], players[-1]] + players[1:-1]
    return rounds


def off_diagonal_norm(a):
    return np.linalg.norm(a - np.diag(np.diag(a)))


class JacobiEigh:
    """Implements the cyclic Jacobi eigenvalue algorithm for real symmetric
    matrices.

    Arguments:
        tol (float, optional): the sweeps stop once the Frobenius norm of the
            off-diagonal part drops below this value (default: 1e-12)
        max_sweeps (int, optional): number of full sweeps before giving up with
            an EigenSolverError (default: 100)

    Each sweep visits every (p, q) pair once, in round-robin order, and zeroes
    a[p, q] with the rotation of Numerical Recipes §11.1:

        theta = (a_qq - a_pp) / (2 a_pq)
        t = sgn(theta) / (|theta| + sqrt(theta^2 + 1))
        c = 1 / sqrt(t^2 + 1),  s = t c
    """

    def __init__(self, tol=1e-12, max_sweeps=100):
        if not tol > 0:
            raise ParameterError('Invalid tolerance: {0}'.format(tol))
        if not max_sweeps >= 1:
            raise ParameterError('Invalid max_sweeps: {0}'.format(max_sweeps))
        self.tol = tol
        self.max_sweeps = max_sweeps
        self.sweeps = 0

    def __call__(self, matrix):
        """Returns (eigenvalues, eigenvectors) in ascending eigenvalue order,
        eigenvectors as columns, like numpy.linalg.eigh."""
        a = np.array(matrix, dtype=np.float64)
        if a.ndim != 2 or a.shape[0] != a.shape[1]:
            raise ParameterError('expected a square matrix, got %s' % (a.shape,))
        n = a.shape[0]
        a = 0.5 * (a + a.T)
        v = np.eye(n)
        rounds = round_robin_pairs(n)

        self.sweeps = 0
        while off_diagonal_norm(a) >= self.tol:
            if self.sweeps >= self.max_sweeps:
                raise EigenSolverError(
                    'Jacobi did not converge after %d sweeps (off-diagonal '
                    'norm %.3e)' % (self.sweeps, off_diagonal_norm(a)))
            for p, q in rounds:
                self._rotate(a, v, p, q)
            self.sweeps += 1

        w = np.diag(a).copy()
        order = np.argsort(w, kind='stable')
        return w[order], v[:, order]

    @staticmethod
    def _rotate(a, v, p, q):
        apq = a[p, q]
        active = apq != 0.
        if not active.any():
            return
        p, q, apq = p[active], q[active], apq[active]
        theta = (a[q, q] - a[p, p]) / (2. * apq)
        t = np.where(theta >= 0., 1., -1.) / (np.abs(theta) + np.hypot(theta, 1.))
        c = 1. / np.sqrt(t * t + 1.)
        s = t * c

        # columns, then rows: a <- J^T a J
        ap, aq = a[:, p].copy(), a[:, q].copy()
        a[:, p] = c * ap - s * aq
        a[:, q] = s * ap + c * aq
        ap, aq = a[p, :].copy(), a[q, :].copy()
        a[p, :] = c[:, None] * ap - s[:, None] * aq
        a[q, :] = s[:, None] * ap + c[:, None] * aq
        a[p, q] = 0.
        a[q, p] = 0.

        vp, vq = v[:, p].copy(), v[:, q].copy()
        v[:, p] = c * vp - s * vq
        v[:, q] = s * vp + c * vq


def jacobi_eigh(matrix, tol=1e-12, max_sweeps=100):
    return JacobiEigh(tol=tol, max_sweeps=max_sweeps)(matrix)
