"""
Scattering Command Line
Prepare wave-packet states, run trajectories, sweep the relative-error table,
export preparation circuits and run the variational vacuum search.

    python scattering_cli.py evolve --config configs/fig4.json --output results/fig4
"""

import argparse
import sys
import traceback
from dataclasses import replace
from typing import Dict, List, Optional

from dotenv import load_dotenv

from circuit_engine import export_qasm, qasm_state_fidelity
from ising_model import DENSE_CAP, exact_ground_state
from results_analyzer import ReportAnalyzer
from run_config import DEFAULT_JOBS, DEFAULT_OUTPUT_DIR, ConfigError, RunConfig, load_run_config
from run_store import RunStore
from scattering_experiments import (
    AGGREGATIONS,
    prepare_scattering_state,
    prepare_vacuum,
    run_scattering_experiment,
    run_vqe,
    table1_reports,
)
from wave_packets import PrepVariant, build_packet_circuit, preparation_metrics

load_dotenv()

EXIT_OK = 0
EXIT_CONFIG = 1
EXIT_RUNTIME = 2
EXIT_PARTIAL = 3

BANNER = """
╔═══════════════════════════════════════════════════════════╗
║    FERMIONIC WAVE-PACKET SCATTERING TOOLKIT                ║
║    Modified Ising model · Givens + LOBE state preparation  ║
╚═══════════════════════════════════════════════════════════╝
"""


def _section(title: str):
    print("\n" + "="*60)
    print(title)
    print("="*60)


def _step_printer(every: int = 10):
    def report(step: int, total: int):
        if step % every == 0 or step == total:
            print(f"  step {step}/{total}")
    return report


def _require_packets(config: RunConfig):
    if not config.packets:
        raise ConfigError(["packets: at least one packet is required for this command"])


def cmd_prepare(config: RunConfig, store: RunStore) -> int:
    """Vacuum plus packets; writes the system state and preparation metrics."""
    _require_packets(config)
    _section(f"PREPARING {config.variant.value.upper()} STATE (N = {config.model.n_sites})")

    vacuum_state, info = prepare_vacuum(config.model, config.vacuum, config.vqe)
    print(f"✓ Vacuum ready ({info['vacuum_source']})")
    state, metrics = prepare_scattering_state(config.model, config.packets, config.variant, vacuum_state)
    metrics.update(info)
    if len(config.packets) == 2 and config.model.n_sites % 2 == 0:
        metrics.update(preparation_metrics(config.packets, config.model.n_sites, config.variant))
    print(f"✓ Packets applied")

    store.save_config_echo(config.to_dict())
    store.save_state(state, {
        'variant': config.variant.value,
        'post_selection_probability': metrics.get('post_selection_probability'),
        'config_echo': config.to_dict(),
    })
    store.save_metrics(metrics)
    return EXIT_OK


def cmd_evolve(config: RunConfig, store: RunStore) -> int:
    """Full scattering run; one dataset row per time step."""
    _require_packets(config)
    _section(f"EVOLVING {config.trotter.n_steps} STEPS OF dt = {config.trotter.dt}")

    dataset = run_scattering_experiment(
        config.model,
        config.packets,
        config.variant,
        config.trotter,
        config.vacuum,
        config.vqe,
        progress=_step_printer(),
    )
    dataset.config_echo = config.to_dict()
    drift = abs(dataset.metrics.get("final_norm", 1.0) - 1)
    if drift > 1e-8:
        print(f"⚠ Norm drifted by {drift:.2e}")

    store.save_config_echo(dataset.config_echo)
    store.save_dataset(dataset, config.output.formats)
    store.save_metrics(dataset.metrics)
    return EXIT_OK


def cmd_table(config: RunConfig, store: RunStore, jobs: int = 1) -> int:
    """Relative-error sweep over the config grid; exit 3 when any cell fails."""
    _require_packets(config)
    if not config.grid:
        raise ConfigError(["grid: the table command needs at least one [J, g] cell"])
    _section(f"RELATIVE ERROR SWEEP: {len(config.grid)} CELLS, {jobs} WORKER(S)")

    def report(cell, ok: bool):
        print(f"  {'✓' if ok else '✗'} J={cell[0]:.2f} g={cell[1]:.2f}")

    reports = table1_reports(
        config.grid,
        config.model,
        config.packets,
        config.trotter,
        config.vacuum,
        config.vqe,
        config.output.exclude_initial,
        jobs,
        progress=report,
    )
    primary = reports[config.output.aggregation]
    alternate_name = next(a for a in AGGREGATIONS if a != config.output.aggregation)
    alternate = reports[alternate_name]

    store.save_config_echo(config.to_dict())
    store.save_text("error_report.txt", primary.to_text())
    if "csv" in config.output.formats:
        store.save_text("error_report.csv", primary.to_csv())
    store.save_json("error_report.json", primary.to_dict())
    store.save_json(f"error_report_{alternate_name}.json", alternate.to_dict())

    analyzer = ReportAnalyzer(primary, alternate)
    analyzer.print_overview()
    analyzer.print_acceptance()
    analyzer.export_analysis(str(store.run_dir / "analysis.json"))
    store.save_metrics({'cells': len(primary.rows), 'failed_cells': len(primary.failed_rows)})

    if primary.failed_rows:
        print(f"\n✗ {len(primary.failed_rows)} cell(s) failed")
        return EXIT_PARTIAL
    return EXIT_OK


def cmd_export(config: RunConfig, store: RunStore) -> int:
    """OpenQASM 3 text of the truncated-unitary preparation circuit."""
    _require_packets(config)
    _section("EXPORTING PREPARATION CIRCUIT")
    circuit = build_packet_circuit(config.packets, PrepVariant.TRUNCATED_UNITARY, config.model.n_sites)
    text = export_qasm(circuit, expand_toffoli=config.output.expand_toffoli)
    store.save_config_echo(config.to_dict())
    store.save_text("circuit.qasm", text)
    metrics = {'circuit_width': circuit.width, 'gate_count': len(circuit)}
    if len(config.packets) == 2 and config.model.n_sites % 2 == 0:
        metrics.update(preparation_metrics(config.packets, config.model.n_sites, PrepVariant.TRUNCATED_UNITARY))

    # re-import through qiskit and compare on |0...0>
    fidelity = qasm_state_fidelity(text, circuit)
    metrics['reimport_fidelity'] = fidelity
    status = "✓" if fidelity > 1 - 1e-9 else "⚠"
    print(f"{status} Re-imported circuit fidelity: {fidelity:.12f}")
    store.save_metrics(metrics)
    return EXIT_OK


def cmd_vqe(config: RunConfig, store: RunStore) -> int:
    """Variational vacuum; reports the gap to the exact energy when it is available."""
    _section(f"VQE: {config.vqe.n_layers} LAYER(S), {config.vqe.max_iterations} SPSA ITERATIONS")

    def report(iteration: int, best: float):
        if iteration % 50 == 0:
            print(f"  iteration {iteration}: best energy {best:.8f}")

    result = run_vqe(config.model, config.vqe, progress=report)
    summary: Dict = {
        'energy': result.energy,
        'evaluations': result.evaluations,
        'learning_rate': result.learning_rate,
        'seed': result.seed,
        'parameters': [float(p) for p in result.parameters],
    }
    if config.model.n_sites <= DENSE_CAP:
        exact, _ = exact_ground_state(config.model)
        summary['exact_energy'] = exact
        summary['relative_error_percent'] = 100 * abs((result.energy - exact) / exact)
        print(f"✓ E_vqe = {result.energy:.8f}, E_exact = {exact:.8f} "
              f"({summary['relative_error_percent']:.3f}%)")

    store.save_config_echo(config.to_dict())
    store.save_json("vqe.json", {**summary, 'history': result.history})
    store.save_state(result.state, {'vacuum_source': 'vqe', 'config_echo': config.to_dict()})
    store.save_metrics(summary)
    return EXIT_OK


COMMANDS = {
    'prepare': cmd_prepare,
    'evolve': cmd_evolve,
    'table': cmd_table,
    'export': cmd_export,
    'vqe': cmd_vqe,
}


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", required=True, help="JSON run config")
    common.add_argument("--jobs", type=int, default=DEFAULT_JOBS, help="worker processes for the table sweep")
    common.add_argument("--seed", type=int, default=None, help="override the VQE seed")
    common.add_argument("--format", choices=["csv", "json"], default=None, help="write only this dataset format")
    common.add_argument("--output", default=None, help="run directory (default: a timestamped directory)")
    common.add_argument("--expand-toffoli", action="store_true", help="export Toffolis as six CNOTs")

    parser = argparse.ArgumentParser(description="Fermionic wave-packet scattering toolkit")
    subparsers = parser.add_subparsers(dest="command", required=True)
    for name, handler in COMMANDS.items():
        subparsers.add_parser(name, parents=[common], help=handler.__doc__)
    return parser


def main(argv: Optional[List[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    print(BANNER)

    try:
        config = load_run_config(args.config, seed=args.seed)
        output = config.output
        if args.format:
            output = replace(output, formats=(args.format,))
        if args.expand_toffoli:
            output = replace(output, expand_toffoli=True)
        config = replace(config, output=output)
        print(f"✓ Loaded config {args.config}")
    except ConfigError as e:
        print(f"\n✗ Invalid config:")
        for message in e.messages:
            print(f"   • {message}")
        return EXIT_CONFIG

    store = RunStore(DEFAULT_OUTPUT_DIR)
    try:
        if args.command == 'table':
            # validate before creating the run directory
            if not config.grid:
                raise ConfigError(["grid: the table command needs at least one [J, g] cell"])
            _require_packets(config)
            store.start_run(args.command, args.output)
            return cmd_table(config, store, jobs=max(1, args.jobs))
        if args.command != 'vqe':
            _require_packets(config)
        store.start_run(args.command, args.output)
        return COMMANDS[args.command](config, store)
    except ConfigError as e:
        print(f"\n✗ Invalid config:")
        for message in e.messages:
            print(f"   • {message}")
        return EXIT_CONFIG
    except Exception as e:
        print(f"\n✗ {args.command} failed: {type(e).__name__}: {e}")
        traceback.print_exc()
        return EXIT_RUNTIME


if __name__ == "__main__":
    sys.exit(main())
