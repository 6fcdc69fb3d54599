"""
Pandora Over Time - linha de comando
Geração de instâncias, solver, auditoria de CRS, estratégias, oráculo e lotes

Uso:
    python pandora_cli.py generate --n 3 --horizon 6 --seed 7 --out data/instances/f1.json
    python pandora_cli.py pipeline data/instances/f1.json --oracle
    python pandora_cli.py compare data/instances/f1.json --strategies main fixed
"""
import argparse
import sys
from fractions import Fraction
from pathlib import Path
from typing import Any, Dict, Optional, Sequence

import pandas as pd

from config import AUDIT_TRIALS, DEFAULT_SEED, MC_TRIALS
from core.distributions import format_fraction
from core.indices import ReservationMethod, indices_for_instance, reservation_index
from core.instance import DiscountKind, Instance, VariantTag, validate
from engine.evaluation import enumerate_outcomes, evaluate, monte_carlo
from engine.oracle import OracleGuards, adaptivity_gap_probe, optimal_adaptive_oracle, upper_bound_chain
from experiments.batch import ExperimentConfig, compare_strategies, run_batch
from experiments.generator import GeneratorParams, generate_batch, generate_instance
from experiments.pipeline import PipelineConfig, run_pipeline
from solver.crs import CrsScheme, IntervalRule, MatroidRule, SchemeTag, crs_audit, solve_block_matching
from solver.hypergraph import build
from solver.submodular import LpMode, SolverConfig, SubmodularObjective, measured_continuous_greedy
from strategies.threshold import STRATEGY_NAMES, build_strategy, traces_frame
from utils.data_loader import (
    dumps_instance,
    frame_to_csv,
    jsonable,
    load_instance,
    report_to_json,
    save_instance,
    write_output,
)
from utils.errors import PandoraError, ValidationError, exit_code_for
from utils.logger import get_logger

logger = get_logger(__name__)


# === Auxiliares ===

def _load(path: str) -> Instance:
    instance = load_instance(path)
    problems = validate(instance)
    if problems:
        for problem in problems:
            logger.error(f"Violação: {problem}")
        raise ValidationError(f"Instância inválida: {path} ({len(problems)} violações)", problems)
    return instance


def _solver_config(args: argparse.Namespace) -> SolverConfig:
    defaults = SolverConfig()
    config = SolverConfig(
        b=Fraction(args.b) if getattr(args, "b", None) else defaults.b,
        mcg_steps=getattr(args, "steps", None) or defaults.mcg_steps,
        lp_mode=LpMode(args.lp_mode) if getattr(args, "lp_mode", None) else defaults.lp_mode,
        rounding_repeats=getattr(args, "rounding_repeats", None) or defaults.rounding_repeats,
        local_search_epsilon=(Fraction(args.epsilon) if getattr(args, "epsilon", None)
                              else defaults.local_search_epsilon),
        seed=args.seed,
    )
    problems = config.violations()
    if problems:
        raise ValidationError(f"Parâmetros do solver inválidos: {'; '.join(problems)}", problems)
    return config


def _emit(args: argparse.Namespace, report: Any = None, frame: Optional[pd.DataFrame] = None,
          default_format: str = "json") -> None:
    """Escreve relatório (JSON) ou tabela (CSV) no destino --out"""
    fmt = args.format or default_format
    if frame is not None and fmt == "csv":
        content = frame_to_csv(frame)
    elif frame is not None and report is None:
        content = report_to_json(frame.to_dict(orient="records"))
    elif fmt == "csv":
        scalars = {k: v for k, v in jsonable(report).items() if not isinstance(v, (dict, list))}
        content = frame_to_csv(pd.DataFrame([scalars]))
    else:
        payload = dict(report)
        if frame is not None:
            payload["rows"] = frame.to_dict(orient="records")
        content = report_to_json(payload)
    write_output(content, args.out)


def _add_solver_flags(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--b", help="Escala do politopo bP (racional, ex. 5227/10000)")
    parser.add_argument("--steps", type=int, help="Passos T do greedy contínuo medido")
    parser.add_argument("--rounding-repeats", type=int, help="Repetições do arredondamento")
    parser.add_argument("--lp-mode", choices=[mode.value for mode in LpMode], help="Direção do MCG")
    parser.add_argument("--epsilon", help="Tolerância da busca local (variante INSTANT)")


def _add_scheme_flags(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--matroid-rule", choices=[r.value for r in MatroidRule], default=MatroidRule.FAIR.value)
    parser.add_argument("--interval-rule", choices=[r.value for r in IntervalRule], default=IntervalRule.MARKED.value)
    parser.add_argument("--scheme-tag", choices=[t.value for t in SchemeTag], default=SchemeTag.COMPOSED.value)


def _scheme(args: argparse.Namespace) -> CrsScheme:
    return CrsScheme(MatroidRule(args.matroid_rule), IntervalRule(args.interval_rule), SchemeTag(args.scheme_tag))


# === Subcomandos ===

def cmd_generate(args: argparse.Namespace) -> None:
    params = GeneratorParams(
        n=args.n,
        horizon=args.horizon,
        support_size=args.support,
        value_max=args.value_max,
        cost_max=args.cost_max,
        cost_denominator=args.cost_denominator,
        max_processing=args.max_processing,
        discount_kind=DiscountKind(args.discount),
        variant=VariantTag(args.variant),
        absent_rate=args.absent_rate,
        classic=args.classic,
    )
    if args.count == 1:
        write_output(dumps_instance(generate_instance(params, args.seed, name=args.name)), args.out)
        return
    if args.out is None:
        raise ValidationError("--count > 1 exige --out apontando para um diretório")
    for instance in generate_batch(params, args.count, args.seed):
        save_instance(instance, Path(args.out) / f"{instance.name}.json")


def cmd_reservation(args: argparse.Namespace) -> None:
    instance = _load(args.instance)
    method = ReservationMethod(args.method)
    rows = []
    for (i, t), index in sorted(indices_for_instance(instance).items()):
        if method is not ReservationMethod.EXACT:
            index = reservation_index(instance.boxes[i].reward_at(t), instance.boxes[i].cost_at(t),
                                      key=(i, t), method=method)
        rows.append({
            "i": i,
            "t": t,
            "cost": format_fraction(instance.boxes[i].cost_at(t)),
            "r": format_fraction(index.r),
            "E[Y]": format_fraction(index.expected_y),
            "residual": float(index.residual),
        })
    frame = pd.DataFrame(rows, columns=["i", "t", "cost", "r", "E[Y]", "residual"])
    _emit(args, frame=frame, default_format="csv")


def cmd_hypergraph(args: argparse.Namespace) -> None:
    h = build(_load(args.instance))
    _emit(args, frame=h.frame(), default_format="csv")


def cmd_solve(args: argparse.Namespace) -> None:
    h = build(_load(args.instance))
    solved = solve_block_matching(h, _solver_config(args), oracle=args.oracle, scheme=_scheme(args))
    _emit(args, report=solved["report"])


def cmd_crs_audit(args: argparse.Namespace) -> None:
    h = build(_load(args.instance))
    config = _solver_config(args)
    solution = measured_continuous_greedy(SubmodularObjective.from_hypergraph(h), h, config)
    frame, summary = crs_audit(h, solution, trials=args.trials, seed=args.seed, scheme=_scheme(args))
    if (args.format or "csv") == "csv":
        _emit(args, frame=frame, default_format="csv")
    else:
        _emit(args, report=summary, frame=frame)


def cmd_run(args: argparse.Namespace) -> None:
    instance = _load(args.instance)
    strategy, aux = build_strategy(args.strategy, instance, _solver_config(args))
    if args.exact:
        report = evaluate(instance, strategy, exact=True, trials=args.trials, seed=args.seed)
        if args.dump_traces:
            outcomes = enumerate_outcomes(instance, strategy)
            frame = traces_frame([trace for _, trace in outcomes])
            probs = {k: format_fraction(p) for k, (p, _) in enumerate(outcomes)}
            frame.insert(1, "probability", frame["trial"].map(probs))
            write_output(frame_to_csv(frame), args.dump_traces)
    else:
        report, traces = monte_carlo(instance, strategy, args.trials, args.seed, keep_traces=bool(args.dump_traces))
        if args.dump_traces:
            write_output(frame_to_csv(traces_frame(traces)), args.dump_traces)
    payload = report.to_dict()
    payload["strategy"] = aux
    _emit(args, report=payload)


def cmd_oracle(args: argparse.Namespace) -> None:
    instance = _load(args.instance)
    guards = OracleGuards.from_config(unsafe=args.unsafe)
    result = optimal_adaptive_oracle(instance, guards, prune_idle=args.prune_idle)
    report: Dict[str, Any] = result.to_dict()
    if args.verify:
        report["recomputed_value"] = result.recompute_value(instance)
    if args.chain:
        report["upper_bound_chain"] = upper_bound_chain(instance, guards)
    if args.probe:
        report["adaptivity_gap"] = adaptivity_gap_probe(instance, guards)
    _emit(args, report=report)


def cmd_compare(args: argparse.Namespace) -> None:
    frames = []
    for path in args.instances:
        frames.append(compare_strategies(
            _load(path),
            args.strategies,
            config=_solver_config(args),
            exact=not args.monte_carlo,
            trials=args.trials,
            seed=args.seed,
            guards=OracleGuards.from_config(unsafe=args.unsafe),
        ))
    _emit(args, frame=pd.concat(frames, ignore_index=True), default_format="csv")


def cmd_batch(args: argparse.Namespace) -> None:
    config = ExperimentConfig.from_yaml(args.config)
    if args.unsafe:
        config.unsafe = True
    frame = run_batch(config)
    if args.out is None and config.output:
        args.out = config.output
    _emit(args, frame=frame, default_format="csv")


def cmd_pipeline(args: argparse.Namespace) -> None:
    config = PipelineConfig(
        solver=_solver_config(args),
        exact=not args.monte_carlo,
        trials=args.trials,
        seed=args.seed,
        oracle=args.oracle,
        guards=OracleGuards.from_config(unsafe=args.unsafe),
        scheme=_scheme(args),
    )
    _emit(args, report=run_pipeline(_load(args.instance), config))


# === Parser ===

def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--seed", type=int, default=DEFAULT_SEED, help="Semente (reprodutibilidade)")
    common.add_argument("--format", choices=["csv", "json"], help="Formato da saída")
    common.add_argument("--out", help="Arquivo de saída (stdout quando omitido)")
    common.add_argument("--unsafe", action="store_true", help="Ignora os guards do oráculo")

    parser = argparse.ArgumentParser(
        prog="pandora_cli.py",
        description="Pandora's Box Over Time: solver, estratégias de limiar e oráculos exatos",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("generate", parents=[common], help="Gera instância aleatória")
    p.add_argument("--n", type=int, default=3)
    p.add_argument("--horizon", type=int)
    p.add_argument("--support", type=int, default=2)
    p.add_argument("--value-max", type=int, default=10)
    p.add_argument("--cost-max", type=int, default=3)
    p.add_argument("--cost-denominator", type=int, default=2)
    p.add_argument("--max-processing", type=int, default=0)
    p.add_argument("--discount", choices=[k.value for k in DiscountKind], default=DiscountKind.IDENTITY.value)
    p.add_argument("--variant", choices=[v.value for v in VariantTag], default=VariantTag.GENERAL.value)
    p.add_argument("--absent-rate", type=float, default=0.0)
    p.add_argument("--classic", action="store_true")
    p.add_argument("--count", type=int, default=1)
    p.add_argument("--name", default="")
    p.set_defaults(handler=cmd_generate)

    p = sub.add_parser("reservation", parents=[common], help="Índices de reserva por slot")
    p.add_argument("instance")
    p.add_argument("--method", choices=[m.value for m in ReservationMethod], default=ReservationMethod.EXACT.value)
    p.set_defaults(handler=cmd_reservation)

    p = sub.add_parser("hypergraph", parents=[common], help="Arestas do hipergrafo H(I)")
    p.add_argument("instance")
    p.set_defaults(handler=cmd_hypergraph)

    p = sub.add_parser("solve", parents=[common], help="Submodular Block Matching")
    p.add_argument("instance")
    p.add_argument("--oracle", action="store_true", help="Compara com a enumeração exaustiva")
    _add_solver_flags(p)
    _add_scheme_flags(p)
    p.set_defaults(handler=cmd_solve)

    p = sub.add_parser("crs-audit", parents=[common], help="Auditoria de balanço do CRS")
    p.add_argument("instance")
    p.add_argument("--trials", type=int, default=AUDIT_TRIALS)
    _add_solver_flags(p)
    _add_scheme_flags(p)
    p.set_defaults(handler=cmd_crs_audit)

    p = sub.add_parser("run", parents=[common], help="Executa uma estratégia")
    p.add_argument("instance")
    p.add_argument("--strategy", choices=STRATEGY_NAMES, default="main")
    p.add_argument("--trials", type=int, default=MC_TRIALS)
    p.add_argument("--exact", action="store_true", help="Enumeração exaustiva (dentro do guard)")
    p.add_argument("--dump-traces", help="CSV com os traços")
    _add_solver_flags(p)
    p.set_defaults(handler=cmd_run)

    p = sub.add_parser("oracle", parents=[common], help="Estratégia adaptativa ótima")
    p.add_argument("instance")
    p.add_argument("--prune-idle", action="store_true")
    p.add_argument("--verify", action="store_true", help="Reavalia a política por enumeração")
    p.add_argument("--chain", action="store_true", help="OPT <= 2 max f(M) (e E[max Y] em FIXED)")
    p.add_argument("--probe", action="store_true", help="Sonda do gap de adaptatividade")
    p.set_defaults(handler=cmd_oracle)

    p = sub.add_parser("compare", parents=[common], help="Estratégias vs oráculo")
    p.add_argument("instances", nargs="+")
    p.add_argument("--strategies", nargs="+", choices=STRATEGY_NAMES, default=["main"])
    p.add_argument("--trials", type=int, default=MC_TRIALS)
    p.add_argument("--monte-carlo", action="store_true", help="Avalia por simulação")
    _add_solver_flags(p)
    p.set_defaults(handler=cmd_compare)

    p = sub.add_parser("batch", parents=[common], help="Experimento em lote (YAML)")
    p.add_argument("config")
    p.set_defaults(handler=cmd_batch)

    p = sub.add_parser("pipeline", parents=[common], help="Pipeline completo de pi_main")
    p.add_argument("instance")
    p.add_argument("--oracle", action="store_true")
    p.add_argument("--trials", type=int, default=MC_TRIALS)
    p.add_argument("--monte-carlo", action="store_true")
    _add_solver_flags(p)
    _add_scheme_flags(p)
    p.set_defaults(handler=cmd_pipeline)

    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        args.handler(args)
    except PandoraError as exc:
        logger.error(f"{type(exc).__name__}: {exc}")
        return exit_code_for(exc)
    except ValueError as exc:
        # Configuração malformada (ex.: PANDORA_GUARD_OVERRIDE)
        logger.error(f"Configuração inválida: {exc}")
        return 2
    except Exception as exc:
        logger.exception(f"Falha inesperada: {type(exc).__name__}: {exc}")
        return exit_code_for(exc)
    return 0


if __name__ == "__main__":
    sys.exit(main())
