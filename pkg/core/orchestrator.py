"""
Sweep orchestration for the furdyn subcommands.

Each subcommand expands an ExperimentConfig into cells (one per system, or
per system/family pair), runs them, and writes the reports. Cells may run on
a thread pool; the results are reduced in cell order, so the output does not
depend on the worker count.
"""
import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Callable, Dict, List, Optional, Sequence, Tuple

from config.settings import ExperimentConfig, ProbeConfig
from core import zset
from core.family import (
    FamilyDescriptor,
    Verdict,
    contains,
    dual,
    fails,
    has_ramsey_property,
    holds,
    implies,
    inconclusive,
    is_filter,
    normal_form,
    parse_family,
    to_string,
    upper_density_above,
)
from core.sampler import filter_check, parse_set_expression, ramsey_check, sample_member, sample_nonmember
from integrations.reports.writer import build_document, write_densities, write_report, write_summary, write_trace
from services.classify.dichotomy import BRANCH_UNDETERMINED, density_dichotomy, dichotomy_report
from services.classify.equicontinuity import f_equicontinuity
from services.classify.lemmas import (
    lemma31_invariance_check,
    lemma43_44_check,
    lemma45_check,
    strength_monotonicity_check,
)
from services.classify.mean import mean_equicontinuity, mean_l_stable, mean_sensitivity
from services.classify.probe import HypothesisError, ball_points, family_label, probe_seed
from services.classify.sensitivity import f_sensitivity, open_set_probes
from services.dynamics.orbit import diam_trace, separation_trace
from services.dynamics.space import MetricSystem, as_fraction, make_system

EXIT_OK = 0
EXIT_CONFIG = 1
EXIT_INCONSISTENT = 2

COMMANDS = ('analyze', 'dichotomy', 'densities', 'lemmas', 'selftest')
DEFAULT_SYSTEMS = ['rot(sqrt2-1)', 'doubling']
DEFAULT_FAMILIES = ['thick', 'cf', 'ud>0.3']
SELFTEST_FAMILIES = ['B', 'cf', 'synd', 'thick', 'tsynd', 'ud>0.3', 'ld>=0.7', 'bud>0.3', 'bld>=0.7',
                     'ld>=1', 'k(thick)']
SELFTEST_TRIALS = 8
NO_FAMILY = '-'
FAMILY_SYSTEM = 'families'


@dataclass(frozen=True)
class Cell:
    system: Optional[MetricSystem]
    family: Optional[FamilyDescriptor] = None
    item: Optional[str] = None

    @property
    def label(self) -> str:
        parts = [self.system.name if self.system else FAMILY_SYSTEM]
        if self.family is not None:
            parts.append(to_string(self.family))
        if self.item is not None:
            parts.append(self.item)
        return '|'.join(parts)


@dataclass
class CellResult:
    label: str
    documents: List[Dict[str, Any]] = field(default_factory=list)
    density_rows: List[Dict[str, Any]] = field(default_factory=list)
    traces: List[Tuple[str, Sequence[float]]] = field(default_factory=list)
    inconsistent: bool = False
    skipped: bool = False
    error: Optional[str] = None


@dataclass
class SweepResult:
    command: str
    documents: List[Dict[str, Any]]
    density_rows: List[Dict[str, Any]]
    inconsistent: bool
    errors: List[str]
    skipped: List[str]
    written: List[Path] = field(default_factory=list)

    @property
    def exit_code(self) -> int:
        return EXIT_INCONSISTENT if self.inconsistent else EXIT_OK


def resolve_systems(cfg: ExperimentConfig) -> List[MetricSystem]:
    """
    Raises:
        SpecParseError: a system string is not in the grammar.
    """
    return [make_system(text) for text in (cfg.systems or DEFAULT_SYSTEMS)]


def resolve_families(cfg: ExperimentConfig, default: Sequence[str] = DEFAULT_FAMILIES) -> List[FamilyDescriptor]:
    return [parse_family(text) for text in (cfg.families or default)]


def _document(cfg: ExperimentConfig, probe: ProbeConfig, system: str, family: str, notion: str,
              verdict: Verdict, epsilon: Optional[float] = None, delta_found: Optional[float] = None,
              details: Optional[Dict[str, Any]] = None) -> Dict[str, Any]:
    return build_document(system, family, notion, cfg.seed, verdict.outcome.value, verdict.witness,
                          verdict.horizon_used or probe.horizon, probe.echo(), epsilon=epsilon,
                          delta_found=delta_found, details=details)


def _isometry_disagrees(verdict: Verdict) -> bool:
    return verdict.witness.get('isometry_shortcut_agrees') is False


def run_cells(cells: Sequence[Cell], work: Callable[[Cell], CellResult], workers: int = 1) -> List[CellResult]:
    """Run every cell, logging and recording failures; results come back in cell order."""

    def guarded(cell: Cell) -> CellResult:
        try:
            return work(cell)
        except HypothesisError as e:
            logging.warning('[%s] ⚠ skipped: %s', cell.label, e)
            return CellResult(cell.label, skipped=True)
        except Exception as e:
            logging.error('[%s] ❌ cell failed: %s', cell.label, e)
            return CellResult(cell.label, error=str(e))

    if workers <= 1:
        return [guarded(c) for c in cells]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(guarded, cells))


# analyze

def _analyze_family(cfg: ExperimentConfig, probe: ProbeConfig, cell: Cell) -> CellResult:
    sys, f = cell.system, cell.family
    label = family_label(f)
    out = CellResult(cell.label)
    eq = f_equicontinuity(sys, f, probe.eps_grid, probe)
    out.documents.append(_document(cfg, probe, sys.name, label, eq.notion, eq.verdict,
                                   delta_found=eq.delta_found, details={'samples': eq.samples}))
    out.inconsistent |= _isometry_disagrees(eq.verdict)
    for epsilon in probe.eps_grid:
        sens = f_sensitivity(sys, f, epsilon, probe)
        out.documents.append(_document(cfg, probe, sys.name, label, sens.notion, sens.verdict,
                                       epsilon=epsilon, details={'witness_sets': sens.witness_sets}))
        out.inconsistent |= _isometry_disagrees(sens.verdict)
    return out


def orbit_traces(sys: MetricSystem, probe: ProbeConfig) -> List[Tuple[str, Sequence[float]]]:
    """Diameter trace of the first sampled open set and a separation trace from its center."""
    center, radius = open_set_probes(sys, probe)[0]
    dt = diam_trace(sys, center, radius, probe.horizon, probe.samples, probe_seed(probe, 2, 0))
    traces: List[Tuple[str, Sequence[float]]] = [(f"diam_{sys.name}", dt.values)]
    _, adversarial = ball_points(sys, dt.open_set.center, as_fraction(radius), probe, 2, 0)
    if len(adversarial) > 1:
        sep = separation_trace(sys, adversarial[0], adversarial[1], probe.horizon)
        traces.append((f"separation_{sys.name}", sep.values))
    return traces


def _analyze_mean(cfg: ExperimentConfig, probe: ProbeConfig, cell: Cell) -> CellResult:
    """Mean notions, once per system. Mean equicontinuity at ε/2 rules out mean sensitivity at ε."""
    sys = cell.system
    out = CellResult(cell.label)
    mean = mean_equicontinuity(sys, probe)
    for report in (mean, mean_l_stable(sys, probe)):
        out.documents.append(_document(cfg, probe, sys.name, NO_FAMILY, report.notion, report.verdict,
                                       delta_found=report.delta_found, details={'samples': report.samples}))
        out.inconsistent |= _isometry_disagrees(report.verdict)
    smallest = min(probe.eps_grid)
    for epsilon in probe.eps_grid:
        sens = mean_sensitivity(sys, epsilon, probe)
        out.documents.append(_document(cfg, probe, sys.name, NO_FAMILY, sens.notion, sens.verdict,
                                       epsilon=epsilon, details={'witness_sets': sens.witness_sets}))
        if mean.verdict.holds and sens.verdict.holds and epsilon >= 2 * smallest:
            logging.error('[%s] ❌ mean equicontinuous yet mean sensitive at ε=%s', cell.label, epsilon)
            out.inconsistent = True
    try:
        out.traces.extend(orbit_traces(sys, probe))
    except ValueError as e:
        logging.warning('[%s] ⚠ orbit traces skipped: %s', cell.label, e)
    return out


def inclusion_pairs(families: Sequence[FamilyDescriptor]) -> List[Tuple[FamilyDescriptor, FamilyDescriptor]]:
    """Ordered pairs of distinct families with a known inclusion stronger ⊆ weaker."""
    return [(s, w) for s in families for w in families
            if normal_form(s) != normal_form(w) and implies(s, w)]


def _analyze_strength(cfg: ExperimentConfig, probe: ProbeConfig,
                      pairs: Sequence[Tuple[FamilyDescriptor, FamilyDescriptor]], cell: Cell) -> CellResult:
    sys = cell.system
    out = CellResult(cell.label)
    epsilon = probe.eps_grid[0]
    for stronger, weaker in pairs:
        verdict = strength_monotonicity_check(sys, stronger, weaker, epsilon, probe)
        notion = f"StrengthMonotonicity({family_label(stronger)}=>{family_label(weaker)})"
        out.documents.append(_document(cfg, probe, sys.name, family_label(stronger), notion, verdict,
                                       epsilon=epsilon))
        out.inconsistent |= verdict.fails
    return out


def run_analyze(cfg: ExperimentConfig) -> List[CellResult]:
    probe = cfg.probe_config()
    systems = resolve_systems(cfg)
    families = resolve_families(cfg)
    pairs = inclusion_pairs(families)
    cells: List[Cell] = []
    for sys in systems:
        cells.extend(Cell(sys, f) for f in families)
        cells.append(Cell(sys, item='mean'))
        if pairs:
            cells.append(Cell(sys, item='strength'))

    def work(cell: Cell) -> CellResult:
        if cell.item == 'strength':
            return _analyze_strength(cfg, probe, pairs, cell)
        if cell.family is None:
            return _analyze_mean(cfg, probe, cell)
        return _analyze_family(cfg, probe, cell)

    return run_cells(cells, work, cfg.workers)


# dichotomy

def run_dichotomy(cfg: ExperimentConfig) -> List[CellResult]:
    probe = cfg.probe_config()
    cells = [Cell(sys, f) for sys in resolve_systems(cfg) for f in resolve_families(cfg)]

    def work(cell: Cell) -> CellResult:
        report = dichotomy_report(cell.system, cell.family, probe)
        witness = {'branch': report.branch, 'consistent': report.consistent}
        if not report.consistent:
            verdict = fails(witness, probe.horizon)
        elif report.branch == BRANCH_UNDETERMINED:
            verdict = inconclusive(witness, probe.horizon)
        else:
            verdict = holds(witness, probe.horizon)
        doc = _document(cfg, probe, cell.system.name, family_label(cell.family), 'Dichotomy', verdict,
                        details=report.as_dict())
        return CellResult(cell.label, documents=[doc], inconsistent=not report.consistent)

    return run_cells(cells, work, cfg.workers)


# densities

def run_densities(cfg: ExperimentConfig) -> List[CellResult]:
    """
    Raises:
        ValueError: no set expressions were given.
        SpecParseError: a set expression is not in the grammar.
    """
    if not cfg.sets:
        raise ValueError("densities needs at least one set expression (--set)")
    probe = cfg.probe_config()
    window = probe.policy.banach_min_window(cfg.horizon)
    parsed = [(text, parse_set_expression(text, cfg.horizon)) for text in cfg.sets]
    sets = dict(parsed)

    def work(cell: Cell) -> CellResult:
        profile = zset.density_profile(sets[cell.item], window)
        row = {
            'set': cell.item,
            'horizon': cfg.horizon,
            'upper': profile.upper_est,
            'lower': profile.lower_est,
            'banach_upper': profile.banach_upper_est,
            'banach_lower': profile.banach_lower_est,
            'convergence_spread': profile.convergence_spread,
        }
        logging.info('[densities] %s: upper %.4f, lower %.4f', cell.item, profile.upper_est, profile.lower_est)
        return CellResult(cell.label, density_rows=[row],
                          traces=[(f"density_{cell.item}", profile.prefix_densities)])

    return run_cells([Cell(None, item=text) for text, _ in parsed], work, cfg.workers)


# lemmas

def _lemma_cell(cfg: ExperimentConfig, probe: ProbeConfig, families: List[FamilyDescriptor],
                cell: Cell) -> CellResult:
    sys = cell.system
    out = CellResult(cell.label)

    def record(family: str, notion: str, verdict: Verdict, epsilon: Optional[float] = None) -> None:
        out.documents.append(_document(cfg, probe, sys.name, family, notion, verdict, epsilon=epsilon))
        if verdict.fails:
            out.inconsistent = True

    for a in cfg.a_grid:
        try:
            verdict = lemma45_check(sys, cfg.lemma_delta, a, probe)
        except HypothesisError as e:
            logging.warning('[%s] ⚠ mean-to-density sensitivity skipped at a=%s: %s', cell.label, a, e)
            continue
        record(to_string(upper_density_above(a)), f"MeanSensToDensitySens(a={a})", verdict,
               epsilon=cfg.lemma_delta)

    verdicts = lemma43_44_check(sys, cfg.a_grid, probe)
    for a, verdict in zip(cfg.a_grid, verdicts):
        record(verdict.witness['family'], f"MeanToDensityEqui(a={a})", verdict)
    record('ld>=1', 'DensityEquiToMean', verdicts[-1])

    epsilon = probe.eps_grid[0]
    for f in families:
        record(family_label(f), 'EqBackwardInvariance', lemma31_invariance_check(sys, f, epsilon, probe),
               epsilon=epsilon)

    if sys.transitive:
        record(NO_FAMILY, 'DensityDichotomy', density_dichotomy(sys, cfg.a_grid, probe))
    else:
        logging.warning('[%s] ⚠ density dichotomy needs a transitive system', cell.label)
    return out


def run_lemmas(cfg: ExperimentConfig) -> List[CellResult]:
    probe = cfg.probe_config()
    families = resolve_families(cfg)
    cells = [Cell(sys, item='lemmas') for sys in resolve_systems(cfg)]
    return run_cells(cells, lambda cell: _lemma_cell(cfg, probe, families, cell), cfg.workers)


# selftest

def family_algebra_checks(f: FamilyDescriptor, seed: int, horizon: int, probe: ProbeConfig,
                          others: Optional[Sequence[FamilyDescriptor]] = None) -> Verdict:
    """
    Property suite for one family: dual involution, complement duality on
    sampled members and non-members, and the filter / Ramsey searches
    against the closed-form classification. A sampled member must also
    survive every family in `others` that contains f by the inclusion table.
    """
    if others is None:
        others = [parse_family(text) for text in SELFTEST_FAMILIES]
    policy = probe.policy
    kf = dual(f)
    member = sample_member(f, horizon, seed)
    nonmember = sample_nonmember(f, horizon, seed)
    filter_v = filter_check(f, seed, SELFTEST_TRIALS, horizon, policy)
    ramsey_v = ramsey_check(f, seed, SELFTEST_TRIALS, horizon, policy)
    results = {
        'dual_involution': dual(kf) == normal_form(f),
        'member_not_refuted': not contains(f, member, policy).fails,
        'nonmember_not_accepted': not contains(f, nonmember, policy).holds,
        'member_complement_outside_dual': not contains(kf, zset.complement(member), policy).holds,
        'nonmember_complement_in_dual': not contains(kf, zset.complement(nonmember), policy).fails,
        'filter_search_agrees': not (is_filter(f) and filter_v.fails),
        'ramsey_search_agrees': not (has_ramsey_property(f) and ramsey_v.fails),
    }
    wider = [g for g in others if normal_form(g) != normal_form(f) and implies(f, g)]
    results['wider_families_accept_member'] = not any(contains(g, member, policy).fails for g in wider)
    witness = {'dual': to_string(kf), 'is_filter': is_filter(f), 'ramsey': has_ramsey_property(f),
               'wider': [to_string(g) for g in wider],
               'filter_search': filter_v.outcome.value, 'ramsey_search': ramsey_v.outcome.value,
               'checks': results}
    broken = [name for name, ok in results.items() if not ok]
    if broken:
        return fails({**witness, 'broken': broken}, horizon)
    return holds(witness, horizon)


def run_selftest(cfg: ExperimentConfig) -> List[CellResult]:
    probe = cfg.probe_config()
    families = resolve_families(cfg, SELFTEST_FAMILIES)

    def work(cell: Cell) -> CellResult:
        verdict = family_algebra_checks(cell.family, cfg.seed, cfg.horizon, probe, families)
        if verdict.fails:
            logging.error('[%s] ❌ broken: %s', cell.label, verdict.witness['broken'])
        else:
            logging.info('[%s] ✓ family algebra', cell.label)
        doc = _document(cfg, probe, FAMILY_SYSTEM, family_label(cell.family), 'FamilyAlgebra', verdict)
        return CellResult(cell.label, documents=[doc], inconsistent=verdict.fails)

    return run_cells([Cell(None, f) for f in families], work, cfg.workers)


_RUNNERS = {
    'analyze': run_analyze,
    'dichotomy': run_dichotomy,
    'densities': run_densities,
    'lemmas': run_lemmas,
    'selftest': run_selftest,
}


def reduce_results(command: str, results: Sequence[CellResult]) -> SweepResult:
    """Ordered reduction of cell results."""
    return SweepResult(
        command=command,
        documents=[d for r in results for d in r.documents],
        density_rows=[row for r in results for row in r.density_rows],
        inconsistent=any(r.inconsistent for r in results),
        errors=[r.label for r in results if r.error],
        skipped=[r.label for r in results if r.skipped],
    )


def write_outputs(cfg: ExperimentConfig, sweep: SweepResult, results: Sequence[CellResult]) -> List[Path]:
    out_dir = Path(cfg.outputs)
    written: List[Path] = []
    if cfg.format in ('json', 'both'):
        for doc in sweep.documents:
            path = write_report(out_dir, doc)
            if path is not None:
                written.append(path)
    if cfg.format in ('csv', 'both'):
        if sweep.documents:
            written.append(write_summary(out_dir, sweep.documents))
        if sweep.density_rows:
            written.append(write_densities(out_dir, sweep.density_rows))
        for r in results:
            for name, values in r.traces:
                written.append(write_trace(out_dir, name, values))
    return written


def run_command(command: str, cfg: ExperimentConfig) -> SweepResult:
    """
    Run one subcommand end to end and write its outputs.

    Raises:
        ValueError: unknown command, or a bad system / family / set string
            (SpecParseError).
    """
    if command not in _RUNNERS:
        raise ValueError(f"unknown command {command!r}; expected one of {', '.join(COMMANDS)}")
    logging.info('[%s] ============================================================', command)
    logging.info('[%s] seed=%s horizon=%s workers=%s out=%s', command, cfg.seed, cfg.horizon,
                 cfg.workers, cfg.outputs)
    results = _RUNNERS[command](cfg)
    sweep = reduce_results(command, results)
    sweep.written = write_outputs(cfg, sweep, results)
    if sweep.errors:
        logging.warning('[%s] ⚠ %d cell(s) errored: %s', command, len(sweep.errors), ', '.join(sweep.errors))
    if sweep.inconsistent:
        logging.error('[%s] ❌ consistency violated; see the Fails reports', command)
    else:
        logging.info('[%s] ✓ %d report(s), no inconsistency', command, len(sweep.documents))
    return sweep
