"""Small check-report container shared by the validation entry points."""

from __future__ import annotations


class Check:
    __slots__ = ("name", "ok", "detail")

    def __init__(self, name, ok, detail=""):
        self.name = name
        self.ok = bool(ok)
        self.detail = detail

    def render(self):
        status = "ok" if self.ok else "FAIL"
        if self.detail:
            return "%-4s %s: %s" % (status, self.name, self.detail)
        return "%-4s %s" % (status, self.name)


class Report:
    def __init__(self, title):
        self.title = title
        self.checks = []

    def add(self, name, ok, detail=""):
        self.checks.append(Check(name, ok, detail))
        return ok

    @property
    def ok(self):
        return all(c.ok for c in self.checks)

    def failures(self):
        return [c for c in self.checks if not c.ok]

    def render(self):
        lines = [self.title]
        lines.extend("  " + c.render() for c in self.checks)
        return "\n".join(lines)
