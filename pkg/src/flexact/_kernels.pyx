# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled epoch kernel. Same contract as ``flexact._kernels_py.train_epoch``."""

from libc.math cimport exp, log, sqrt, tanh

DEF NC = 5
DEF PROB_FLOOR = 1e-12


cdef inline double _sigmoid(double h) noexcept nogil:
    cdef double e
    if h >= 0:
        return 1.0 / (1.0 + exp(-h))
    e = exp(h)
    return e / (1.0 + e)


cdef inline void _eval(double h, double slope, double* a, double* d) noexcept nogil:
    cdef double s = _sigmoid(h)
    cdef double t = tanh(h)
    if h > 0:
        a[0] = h
        d[0] = 1.0
        a[3] = h
        d[3] = 1.0
    else:
        a[0] = 0.0
        d[0] = 0.0
        a[3] = slope * h
        d[3] = slope
    a[1] = s
    d[1] = s * (1.0 - s)
    a[2] = t
    d[2] = 1.0 - t * t
    a[4] = h
    d[4] = 1.0


cdef inline void _softmax(double* z, double scale, double* out) noexcept nogil:
    # out = softmax(scale * (z - max z))
    cdef int j
    cdef double zmax = z[0], total = 0.0
    for j in range(1, NC):
        if z[j] > zmax:
            zmax = z[j]
    for j in range(NC):
        out[j] = exp((z[j] - zmax) * scale)
        total += out[j]
    for j in range(NC):
        out[j] /= total


cdef inline void _softmax_vjp(double* p, double* up, double tau, double weight, double* out) noexcept nogil:
    cdef int j
    cdef double dot = 0.0
    for j in range(NC):
        dot += up[j] * p[j]
    for j in range(NC):
        out[j] += weight * p[j] * (up[j] - dot) / tau


def train_epoch(const double[:, ::1] X, const double[:, ::1] Y, double[:, ::1] W, double[::1] b,
                double[::1] logits, const Py_ssize_t[::1] order, const double[:, ::1] noise,
                double tau, double lr, double alpha, double lam, double slope, int fixed,
                bint straight_through, Py_ssize_t batch_size):
    cdef Py_ssize_t n = X.shape[0], d_in = X.shape[1], d_out = W.shape[0]
    cdef Py_ssize_t start, stop, r, row, k, i, bi = 0, m
    cdef int j, best
    cdef double z[NC]
    cdef double p_soft[NC]
    cdef double p_fwd[NC]
    cdef double a[NC]
    cdef double d[NC]
    cdef double c[NC]
    cdef double sq[NC]
    cdef double gsum[NC]
    cdef double target[NC]
    cdef double v[NC]
    cdef double dlog[NC]
    cdef double p_sum[NC]
    cdef double h, y, diff, g, dydh, dh, loss, kl, task_sum = 0.0, kl_sum = 0.0
    cdef bint routed = fixed < 0
    cdef double[:, ::1] dW = W.copy()
    cdef double[::1] db = b.copy()

    for j in range(NC):
        p_sum[j] = 0.0

    start = 0
    while start < n:
        stop = start + batch_size
        if stop > n:
            stop = n
        m = (stop - start) * d_out

        for j in range(NC):
            c[j] = 0.0
            gsum[j] = 0.0
            dlog[j] = 0.0
            p_fwd[j] = 0.0
            p_soft[j] = 0.0
        if routed:
            for j in range(NC):
                z[j] = logits[j] + noise[bi, j]
            _softmax(z, 1.0 / tau, p_soft)
            if straight_through:
                best = 0
                for j in range(1, NC):
                    if p_soft[j] > p_soft[best]:
                        best = j
                p_fwd[best] = 1.0
            else:
                for j in range(NC):
                    p_fwd[j] = p_soft[j]
        for k in range(d_out):
            db[k] = 0.0
            for i in range(d_in):
                dW[k, i] = 0.0

        loss = 0.0
        for r in range(start, stop):
            row = order[r]
            for j in range(NC):
                sq[j] = 0.0
            for k in range(d_out):
                h = b[k]
                for i in range(d_in):
                    h += W[k, i] * X[row, i]
                _eval(h, slope, a, d)
                if routed:
                    y = 0.0
                    dydh = 0.0
                    for j in range(NC):
                        y += p_fwd[j] * a[j]
                        dydh += p_fwd[j] * d[j]
                else:
                    y = a[fixed]
                    dydh = d[fixed]
                diff = y - Y[row, k]
                loss += diff * diff
                g = 2.0 * diff / m
                dh = g * dydh
                db[k] += dh
                for i in range(d_in):
                    dW[k, i] += dh * X[row, i]
                for j in range(NC):
                    c[j] += g * a[j]
                    sq[j] += d[j] * d[j]
            for j in range(NC):
                gsum[j] += sqrt(sq[j])

        task_sum += loss / m
        if routed:
            _softmax_vjp(p_soft, c, tau, 1.0, dlog)
            for j in range(NC):
                z[j] = -(gsum[j] / (stop - start)) / lam
            _softmax(z, 1.0, target)
            kl = 0.0
            for j in range(NC):
                if target[j] > 0:
                    kl += target[j] * (log(target[j]) - log(p_soft[j] if p_soft[j] > PROB_FLOOR else PROB_FLOOR))
                v[j] = -target[j] / p_soft[j] if p_soft[j] > PROB_FLOOR else 0.0
                p_sum[j] += p_soft[j]
            kl_sum += kl
            if alpha > 0:
                _softmax_vjp(p_soft, v, tau, alpha, dlog)

        for k in range(d_out):
            b[k] -= lr * db[k]
            for i in range(d_in):
                W[k, i] -= lr * dW[k, i]
        for j in range(NC):
            logits[j] -= lr * dlog[j]

        bi += 1
        start = stop

    return task_sum / bi, kl_sum / bi, [p_sum[j] / bi for j in range(NC)]
