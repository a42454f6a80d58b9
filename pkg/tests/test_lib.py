"""
This module provides a test library for running scenes end to end through the
command-line entry point and reading back what they produced.
"""
import json
import logging
import os
import tempfile
from typing import Any, Dict, List, Optional

import monolab


class AnalysisHarness:
    """
    A test harness for running scene files the way a user would.

    Each run writes the report and plots into a scratch directory that lives
    until teardown.
    """
    def __init__(self, workdir: Optional[str] = None):
        self._owned = workdir is None
        self._tmp = None
        self.workdir = workdir
        self.exit_code: Optional[int] = None
        self.report: Optional[Dict[str, Any]] = None

    def setup(self):
        """Creates the scratch directory."""
        if self._owned:
            self._tmp = tempfile.TemporaryDirectory(prefix="monolab-")
            self.workdir = self._tmp.name
        os.makedirs(self.workdir, exist_ok=True)
        logging.info("Harness working in %s.", self.workdir)

    def teardown(self):
        """Removes the scratch directory if the harness created it."""
        if self._tmp is not None:
            self._tmp.cleanup()
            self._tmp = None

    @property
    def report_path(self) -> str:
        return os.path.join(self.workdir, "report.json")

    @property
    def plot_dir(self) -> str:
        return os.path.join(self.workdir, "plots")

    def write_scene(self, text: str, name: str = "scene.scene") -> str:
        """Writes scene text into the working directory and returns its path."""
        path = os.path.join(self.workdir, name)
        with open(path, "w", encoding="utf-8") as f:
            f.write(text)
        return path

    def run_scene(self, scene_path: str, *extra: str, plots: bool = False) -> int:
        """Runs `monolab run` on a scene file; the parsed report is kept on the harness."""
        argv = ["run", scene_path, "--out", self.report_path, *extra]
        if plots:
            argv += ["--plot", self.plot_dir]
        self.report = None
        self.exit_code = monolab.main(argv)
        if os.path.exists(self.report_path):
            with open(self.report_path, "r", encoding="utf-8") as f:
                self.report = json.load(f)
            os.remove(self.report_path)
        logging.info("Scene %s finished with exit code %d.", scene_path, self.exit_code)
        return self.exit_code

    def records(self) -> List[Dict[str, Any]]:
        if self.report is None:
            raise RuntimeError("No report: run a scene first.")
        return self.report["requests"]

    def record(self, label: str) -> Dict[str, Any]:
        """The record whose request carried label=..., or the one at that index when label is a number."""
        for rec in self.records():
            if rec.get("label") == label:
                return rec
        if label.isdigit():
            return self.records()[int(label)]
        raise KeyError(f"No record labelled '{label}'.")

    def statuses(self) -> List[str]:
        return [rec["status"] for rec in self.records()]

    def plots(self) -> List[str]:
        if not os.path.isdir(self.plot_dir):
            return []
        return sorted(os.listdir(self.plot_dir))
