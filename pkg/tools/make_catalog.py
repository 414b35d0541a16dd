"""Regenerate src/hamexpr/data/catalog.txt.

Transcription of the 19 circuit architectures from
"Expressibility and entangling capability of parameterized quantum circuits"
(2019), one layer each.  The 4-qubit layouts follow the published figures;
wider registers extend each pattern by its own rule (chains stay chains, rings
stay rings, all-to-all stays all-to-all).

    python tools/make_catalog.py
"""
from __future__ import annotations

from pathlib import Path

OUT = Path(__file__).resolve().parents[1] / "src" / "hamexpr" / "data" / "catalog.txt"


class Layer:
    def __init__(self, n):
        self.n = n
        self.lines = []
        self.slot = 0

    def rot(self, kind, qubits=None):
        for q in range(self.n) if qubits is None else qubits:
            self.lines.append(f"{kind} {q} slot={self.slot}")
            self.slot += 1

    def fixed(self, kind, qubits=None):
        for q in range(self.n) if qubits is None else qubits:
            self.lines.append(f"{kind} {q}")

    def two(self, kind, pairs):
        param = kind.startswith("cr")
        for c, t in pairs:
            if param:
                self.lines.append(f"{kind} {c},{t} slot={self.slot}")
                self.slot += 1
            else:
                self.lines.append(f"{kind} {c},{t}")


def chain_down(n):
    """(n-1 -> n-2), ..., (1 -> 0)"""
    return [(i + 1, i) for i in range(n - 2, -1, -1)]


def even_pairs(n):
    return [(i + 1, i) for i in range(0, n - 1, 2)]


def odd_pairs(n):
    return [(i + 1, i) for i in range(1, n - 1, 2)]


def ring_a(n):
    """(n-1 -> 0), (n-2 -> n-1), ..., (0 -> 1)"""
    return [(j, (j + 1) % n) for j in range(n - 1, -1, -1)]


def ring_b(n):
    """(n-1 -> n-2), (0 -> n-1), (1 -> 0), ..., (n-2 -> n-3)"""
    return [(c, (c - 1) % n) for c in [n - 1] + list(range(n - 1))]


def all_to_all(n):
    return [(c, t) for c in range(n - 1, -1, -1) for t in range(n - 1, -1, -1) if t != c]


def circuit(idx, n):
    L = Layer(n)
    if idx == 1:
        L.rot("rx"); L.rot("rz")
    elif idx in (2, 3, 4):
        L.rot("rx"); L.rot("rz")
        L.two({2: "cx", 3: "crz", 4: "crx"}[idx], chain_down(n))
    elif idx in (5, 6):
        k = "crz" if idx == 5 else "crx"
        L.rot("rx"); L.rot("rz")
        L.two(k, all_to_all(n))
        L.rot("rx"); L.rot("rz")
    elif idx in (7, 8):
        k = "crz" if idx == 7 else "crx"
        L.rot("rx"); L.rot("rz")
        L.two(k, even_pairs(n))
        L.rot("rx"); L.rot("rz")
        L.two(k, odd_pairs(n))
    elif idx == 9:
        L.fixed("h")
        L.two("cz", chain_down(n))
        L.rot("rx")
    elif idx == 10:
        L.rot("ry")
        L.two("cz", chain_down(n) + [(n - 1, 0)])
        L.rot("ry")
    elif idx in (11, 12):
        k = "cx" if idx == 11 else "cz"
        L.rot("ry"); L.rot("rz")
        L.two(k, even_pairs(n))
        inner = range(1, n - 1)
        L.rot("ry", inner); L.rot("rz", inner)
        L.two(k, odd_pairs(n))
    elif idx in (13, 14, 15):
        k = {13: "crz", 14: "crx", 15: "cx"}[idx]
        L.rot("ry")
        L.two(k, ring_a(n))
        L.rot("ry")
        L.two(k, ring_b(n))
    elif idx in (16, 17):
        k = "crz" if idx == 16 else "crx"
        L.rot("rx"); L.rot("rz")
        L.two(k, even_pairs(n))
        L.two(k, odd_pairs(n))
    elif idx in (18, 19):
        k = "crz" if idx == 18 else "crx"
        L.rot("rx"); L.rot("rz")
        L.two(k, ring_a(n))
    else:
        raise ValueError(idx)
    return L


def main():
    blocks = [
        "# Bundled ansatz catalog: 19 single-layer patterns at 4 and 8 qubits.",
        "# Generated by tools/make_catalog.py; edit that script, not this file.",
        "",
    ]
    for n in (4, 8):
        for idx in range(1, 20):
            L = circuit(idx, n)
            blocks.append(
                f"template circuit_{idx:02d} qubits={n} params_per_layer={L.slot} gates_per_layer={len(L.lines)}"
            )
            blocks.extend(L.lines)
            blocks.append("")
    OUT.write_text("\n".join(blocks))
    print(f"wrote {OUT}")


if __name__ == "__main__":
    main()
