"""Independent reference values for the C++ test suites.

Computed with cvxpy (SCS/Clarabel backends), which shares no code with the
library. Run once; the printed numbers are frozen into the C++ tests.
"""
import numpy as np
import cvxpy as cp


def ptranspose(X, dims, sys):
    # partial transpose of a cvxpy expression over subsystem index `sys`
    return cp.partial_transpose(X, dims, sys)


def ket_phi(k):
    v = np.zeros(k * k)
    for i in range(k):
        v[i * k + i] = 1.0
    return v / np.sqrt(k)


def gen_robustness_ppt(rho, dims):
    d = rho.shape[0]
    w = cp.Variable((d, d), hermitian=True)
    cons = [w - rho >> 0, ptranspose(w, dims, 1) >> 0]
    prob = cp.Problem(cp.Minimize(cp.real(cp.trace(w))), cons)
    prob.solve(solver=cp.CLARABEL)
    return prob.value


def std_robustness_ppt(rho, dims):
    d = rho.shape[0]
    y = cp.Variable((d, d), hermitian=True)
    cons = [y >> 0, ptranspose(y, dims, 1) >> 0, rho + y >> 0,
            ptranspose(rho + y, dims, 1) >> 0]
    prob = cp.Problem(cp.Minimize(1 + cp.real(cp.trace(y))), cons)
    prob.solve(solver=cp.CLARABEL)
    return prob.value


def choi_unnormalized(kraus, din):
    d = din
    J = 0
    for K in kraus:
        v = np.zeros((d * K.shape[0],), dtype=complex)
        for i in range(d):
            for o in range(K.shape[0]):
                v[i * K.shape[0] + o] = K[o, i]
        J = J + np.outer(v, v.conj())
    return J


def half_diamond(J1, J2, din, dout):
    # Watrous' program for (1/2)||N1 - N2||_diamond, unnormalized Choi (in (x) out)
    D = din * dout
    Z = cp.Variable((D, D), hermitian=True)
    t = cp.Variable()
    delta = J1 - J2
    cons = [Z >> 0, Z - delta >> 0,
            t * np.eye(din) - cp.partial_trace(Z, [din, dout], 1) >> 0]
    prob = cp.Problem(cp.Minimize(t), cons)
    prob.solve(solver=cp.CLARABEL)
    return prob.value


if __name__ == "__main__":
    phi2 = np.outer(ket_phi(2), ket_phi(2))
    rho = 0.5 * (phi2 + np.eye(4) / 4)
    print("gen_rob_ppt((Phi2+I/4)/2) =", repr(gen_robustness_ppt(rho, [2, 2])))
    print("std_rob_ppt((Phi2+I/4)/2) =", repr(std_robustness_ppt(rho, [2, 2])))
    for k in (2, 3, 4):
        pk = np.outer(ket_phi(k), ket_phi(k))
        print(f"gen_rob_ppt(Phi{k}) =", repr(gen_robustness_ppt(pk, [k, k])))

    X = np.array([[0, 1], [1, 0]], dtype=complex)
    Y = np.array([[0, -1j], [1j, 0]])
    Z = np.diag([1.0 + 0j, -1.0])
    I2 = np.eye(2, dtype=complex)
    Jid = choi_unnormalized([I2], 2)
    for p in (0.1, 0.25, 0.5, 0.75, 1.0):
        # depolarizing: (1-p) rho + p I/2 = Kraus sqrt(1-3p/4) I, sqrt(p/4) {X,Y,Z}
        ks = [np.sqrt(1 - 3 * p / 4) * I2] + [np.sqrt(p / 4) * P for P in (X, Y, Z)]
        Jd = choi_unnormalized(ks, 2)
        print(f"half_diamond(id, depol p={p}) =", repr(half_diamond(Jid, Jd, 2, 2)))
