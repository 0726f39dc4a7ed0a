"""Writes the generated corpus projects: monotone, shift_a and shift_b.

Each project is a set of call chains. Level k of a chain is at stack
distance k from the test that drives it. A chain "breaks" at level b when the
method at level b calls level b + 1 but drops its result, which leaves every
deeper level pseudo-tested. Run from this directory: python3 generate.py
"""

import json
import os
import random


def base_value(a, b, c, x):
    return a * x + b + (1 if x > c else 0)


class Chain:
    def __init__(self, rng, prefix, length, brk, asserted=True, driver=False, notes=0):
        self.prefix = prefix
        self.length = length
        self.brk = brk
        self.asserted = asserted
        self.driver = driver
        self.notes = notes
        self.params = [(rng.randint(2, 9), rng.randint(10, 60), rng.randint(0, 12)) for _ in range(length + 1)]
        self.padding = [rng.randint(0, 3) for _ in range(length + 1)]
        self.x0 = rng.randint(1, 9)

    def name(self, k):
        return f"{self.prefix}_l{k}"

    def value(self, k, x):
        a, b, c = self.params[k]
        v = base_value(a, b, c, x)
        if k < self.length and k != self.brk:
            v += self.value(k + 1, x + 1)
        return v

    def function(self, k):
        a, b, c = self.params[k]
        lines = [f"fn {self.name(k)}(x: int) -> int {{", f"    let base = x * {a} + {b};"]
        lines.append(f"    if x > {c} {{")
        lines.append("        base = base + 1;")
        lines.append("    }")
        for j in range(self.padding[k]):
            lines.append(f"    let pad{j} = x - {j};")
        if k < self.length:
            lines.append(f"    let next = {self.name(k + 1)}(x + 1);")
            if k == self.brk:
                lines.append("    return base;")
            else:
                lines.append("    return base + next;")
        else:
            lines.append("    return base;")
        lines.append("}")
        return "\n".join(lines)

    def sources(self):
        out = [self.function(k) for k in range(self.length, 0, -1)]
        for n in range(self.notes):
            out.append(f"fn {self.prefix}_note{n}(x: int) -> int {{\n    let scaled = x * {n + 2};\n    return scaled + 1;\n}}")
        if self.driver:
            body = [f"fn {self.prefix}_drive(x: int) -> int {{"]
            for n in range(self.notes):
                body.append(f"    let note{n} = {self.prefix}_note{n}(x);")
            body.append(f"    let v = {self.name(1)}(x);")
            body.append(f"    assert v == {self.value(1, self.x0)};")
            body.append("    return v + 1;")
            body.append("}")
            out.append("\n".join(body))
        return out

    def test(self):
        if self.driver:
            call = f"    let r = {self.prefix}_drive({self.x0});"
        elif self.asserted:
            call = f"    assert {self.name(1)}({self.x0}) == {self.value(1, self.x0)};"
        else:
            call = f"    let r = {self.name(1)}({self.x0});"
        return f"test t_{self.prefix} {{\n{call}\n}}"


def write_project(project_id, chains):
    os.makedirs(project_id, exist_ok=True)
    parts = []
    for ch in chains:
        parts.extend(ch.sources())
    parts.extend(ch.test() for ch in chains)
    with open(os.path.join(project_id, "main.tl"), "w") as f:
        f.write("\n\n".join(parts) + "\n")
    with open(os.path.join(project_id, "project.json"), "w") as f:
        f.write(json.dumps({"project_id": project_id, "sources": ["main.tl"]}) + "\n")


def deep_chains(rng, prefix, layout):
    """layout: list of (length, break level, asserted)."""
    return [Chain(rng, f"{prefix}{i}", length, brk, asserted) for i, (length, brk, asserted) in enumerate(layout)]


def main():
    # Breaks move shallower as chains get longer, so the share of
    # pseudo-tested methods grows with distance.
    monotone = [(3, 3, True)] * 3 + [(4, 3, True)] * 3 + [(5, 2, True)] * 3 + [(6, 1, True)] * 3 + [(5, 0, False)]
    write_project("monotone", deep_chains(random.Random(11), "c", monotone))

    shift_a = [(3, 3, True)] * 4 + [(4, 2, True)] * 3 + [(5, 2, True)] * 3 + [(6, 1, True)] * 2 + [(4, 0, False)]
    write_project("shift_a", deep_chains(random.Random(23), "s", shift_a))

    # Inverted: drivers and note helpers near the tests are pseudo-tested,
    # while the deep chains they assert on are fully checked.
    rng = random.Random(37)
    shift_b = [Chain(rng, f"b{i}", length, length, driver=True, notes=notes)
               for i, (length, notes) in enumerate([(4, 1), (4, 2), (5, 1), (5, 2), (3, 1), (3, 2), (4, 1), (5, 1), (3, 2), (4, 2)])]
    write_project("shift_b", shift_b)


if __name__ == "__main__":
    main()
