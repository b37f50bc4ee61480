"""Writes the channel files used by the README and the CLI tests."""

import json
import pathlib

import numpy as np

HERE = pathlib.Path(__file__).parent


def mat(m):
    m = np.asarray(m, dtype=complex)
    return {"rows": m.shape[0], "cols": m.shape[1], "entries": [[float(z.real), float(z.imag)] for z in m.flatten()]}


def kraus_file(name, description, in_dims, out_dims, ops, **labels):
    doc = {"name": name, "description": description, "in_dims": in_dims, "out_dims": out_dims}
    doc.update(labels)
    doc["kraus"] = [mat(k) for k in ops]
    (HERE / f"{name}.json").write_text(json.dumps(doc, indent=1) + "\n")


def choi_file(name, description, in_dims, out_dims, choi):
    doc = {"name": name, "description": description, "in_dims": in_dims, "out_dims": out_dims}
    doc["choi"] = {"rows": choi.shape[0], "entries": [[float(z.real), float(z.imag)] for z in choi.flatten()]}
    (HERE / f"{name}.json").write_text(json.dumps(doc, indent=1) + "\n")


def choi_of(ops, din, dout):
    j = np.zeros((din * dout, din * dout), dtype=complex)
    for k in ops:
        v = np.zeros(din * dout, dtype=complex)
        for i in range(din):
            for o in range(dout):
                v[i * dout + o] = k[o, i]
        j += np.outer(v, v.conj())
    return j / din


I2 = np.eye(2)
X = np.array([[0, 1], [1, 0]])
H = np.array([[1, 1], [1, -1]]) / np.sqrt(2)
SWAP = np.eye(4)[[0, 2, 1, 3]]
CNOT = np.eye(4)[[0, 1, 3, 2]]

kraus_file("identity", "identity on two qubits", [2, 2], [2, 2], [np.eye(4)])
kraus_file("swap", "qubit SWAP", [2, 2], [2, 2], [SWAP])
kraus_file("cnot", "CNOT, control A", [2, 2], [2, 2], [CNOT])
kraus_file("local_hadamard", "H on each side", [2, 2], [2, 2], [np.kron(H, H)])
kraus_file("qubit_identity", "single-qubit identity", [2], [2], [I2])
kraus_file("qubit_x", "single-qubit bit flip", [2], [2], [X])

# CNOT mixed with the replacer to I/4
q = 0.75
ops_c = [CNOT]
j = (1 - q) * choi_of(ops_c, 4, 4) + q * np.eye(16) / 16
choi_file("noisy_cnot", "CNOT with weight 3/4 on the replacer to I/4", [2, 2], [2, 2], j)

# discards all inputs and emits Phi^2 on (A, B)
phi = np.zeros(4)
phi[0] = phi[3] = 1 / np.sqrt(2)
emit = [np.outer(phi, np.eye(16)[i]) for i in range(16)]
kraus_file("phi2_emitter", "discards A A' B B' and emits a Bell pair", [2, 2, 2, 2], [2, 2], emit)
