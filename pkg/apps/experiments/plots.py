import io
import logging

from dataclasses import dataclass

import matplotlib
import numpy as np
from matplotlib.figure import Figure

from apps.experiments.output import atomic_write
from apps.utils.exceptions import DomainError

logger = logging.getLogger(__name__)

KINDS = ('sweep', 'residual', 'convergence')
# Exact zeros cannot sit on a log axis.
LOG_FLOOR = 1e-18


@dataclass(frozen=True)
class PlotSummary:
    kind: str
    points: int
    curves: int
    path: str


def _records(envelope):
    records = envelope.get('records')
    if not records:
        raise DomainError(f"{envelope.get('command', 'envelope')} has no records to plot")
    return records


def _sweep_points(envelope):
    command = envelope.get('command')
    records = _records(envelope)
    if command == 'verify_functional':
        pairs = [(row['gamma'], row['p']) for row in records.get('rows', []) if row['p'] is not None]
    elif command == 'fit_exponent':
        pairs = [tuple(pair) for pair in records.get('data', [])]
    else:
        raise DomainError(f"a sweep plot needs a verify_functional or fit_exponent envelope, got {command}")
    if not pairs:
        raise DomainError(f"{command} envelope has no measured points")
    return np.array(pairs, dtype=float).T


def _plot_sweep(axes, envelope):
    gammas, probabilities = _sweep_points(envelope)
    axes.plot(gammas, probabilities, 'o', label='measured p')
    grid = np.linspace(0.0, max(float(gammas.max()), 1e-3) * 1.05, 200)
    axes.plot(grid, np.exp(-np.pi * grid), '-', label='exp(-pi gamma)')
    axes.set_xlabel('gamma')
    axes.set_ylabel('survival probability')
    return gammas.size, 1


def _plot_residual(axes, envelope):
    command = envelope.get('command')
    records = _records(envelope)
    if command == 'verify_functional':
        rows = [row for row in records.get('rows', []) if row['residual'] is not None]
        if not rows:
            raise DomainError("verify_functional envelope has no residuals")
        gammas = np.array([row['gamma'] for row in rows])
        residuals = np.abs([row['residual'] for row in rows])
        axes.semilogy(gammas, np.maximum(residuals, LOG_FLOOR), 'o', label='|p(2 gamma) - p(gamma)^2|')
        axes.set_xlabel('gamma')
        return gammas.size, 0
    if command == 'verify_integrability':
        commutators = np.array(records.get('commutator_residuals', []), dtype=float)
        compatibilities = np.array(records.get('compatibility_residuals', []), dtype=float)
        if commutators.size == 0:
            raise DomainError("verify_integrability envelope has no residuals")
        index = np.arange(commutators.size)
        axes.semilogy(index, np.maximum(commutators, LOG_FLOOR), 'o', label='||[H, H\']||')
        axes.semilogy(index, np.maximum(compatibilities, LOG_FLOOR), 'x', label='||dH/dtau - dH\'/dt||')
        axes.set_xlabel('grid point')
        return commutators.size + compatibilities.size, 0
    raise DomainError(f"a residual plot needs a verify_functional or verify_integrability envelope, got {command}")


def _plot_convergence(axes, envelope):
    command = envelope.get('command')
    if command != 'simulate':
        raise DomainError(f"a convergence plot needs a simulate envelope, got {command}")
    ladder = np.array(_records(envelope).get('ladder') or [], dtype=float)
    if ladder.shape[0] < 2:
        raise DomainError("convergence plot needs at least two ladder rungs")
    changes = np.abs(np.diff(ladder[:, 1]))
    axes.loglog(ladder[1:, 0], np.maximum(changes, LOG_FLOOR), 'o-', label='|p(T_k) - p(T_k-1)|')
    axes.set_xlabel('T')
    return changes.size, 1


PLOTTERS = {
    'sweep': _plot_sweep,
    'residual': _plot_residual,
    'convergence': _plot_convergence,
}


def render_plot(envelope, kind):
    """SVG bytes for one plot kind; identical envelopes give identical bytes."""
    if kind not in PLOTTERS:
        raise DomainError(f"unknown plot kind {kind!r}; expected one of {', '.join(KINDS)}")
    with matplotlib.rc_context({'svg.hashsalt': 'lz-toolkit', 'svg.fonttype': 'none'}):
        figure = Figure(figsize=(6, 4))
        axes = figure.add_subplot()
        points, curves = PLOTTERS[kind](axes, envelope)
        axes.set_title(f"{envelope.get('command')}: {kind}")
        axes.grid(True, which='both', alpha=0.3)
        axes.legend()
        buffer = io.BytesIO()
        figure.savefig(buffer, format='svg', metadata={'Date': None})
    return buffer.getvalue(), points, curves


def write_plot(envelope, kind, path):
    svg, points, curves = render_plot(envelope, kind)
    atomic_write(path, svg)
    logger.info(f"Wrote {kind} plot with {points} points to {path}")
    return PlotSummary(kind=kind, points=points, curves=curves, path=str(path))
