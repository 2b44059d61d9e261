import argparse
import json
import logging
import sys
from pathlib import Path

from app import __version__
from app.core.errors import ConfigError, InputError, NumericalError, TrialFailedError
from app.core.manifest import RunManifest, manifest_path
from app.core.settings import load_settings
from app.embedding.hankel import EmbeddingSpec, dump_tensor, hankelize
from app.eval.methods import METHODS, run_method
from app.eval.metrics import EvalReport, cep, score, write_cep_csv
from app.eval.synth import SyntheticSpec, synth
from app.eval.trials import run_trials
from app.core.io import write_json
from app.grid.aggregate import aggregate, select_window, split_trajectories, trim_empty_borders
from app.grid.records import load_trajectories, read_vehicle_ids, write_vehicle_ids
from app.grid.speed_field import crop_to, read_field, read_mask, write_field, write_mask

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_IO = 1
EXIT_CONFIG = 2
EXIT_NOT_CONVERGED = 3

LOG_FORMAT = "%(asctime)s %(levelname)s %(name)s: %(message)s"

# Флаг командной строки -> ключ настроек
SOLVER_FLAGS = {
    "tau_s": int, "tau_t": int, "rho0": float, "rho_max": float, "beta": float,
    "epsilon": float, "truncation_r": int, "max_iters": int, "min_iters": int,
    "gamma": float, "warm_start": str, "dual_init": str,
}


def parse_range(text: str):
    """'LO,HI' -> (lo, hi); пустая сторона снимает границу: ',2700' -> (None, 2700.0)."""
    parts = text.split(",")
    if len(parts) != 2:
        raise argparse.ArgumentTypeError(f"expected LO,HI, got {text!r}")
    try:
        return tuple(float(p) if p.strip() else None for p in parts)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected numbers in {text!r}") from None


def exit_code_for(exc: BaseException) -> int:
    if isinstance(exc, TrialFailedError):
        return exit_code_for(exc.cause)
    if isinstance(exc, ConfigError):
        return EXIT_CONFIG
    return EXIT_IO


class AppCore:
    """Командная строка: ingest, split, impute, evaluate, trial, cep, synth."""

    def __init__(self, sys_argv):
        self.argv = list(sys_argv)
        self.parser = self._build_parser()
        self.args = None
        self.manifest = None

    def run(self) -> int:
        self.args = self.parser.parse_args(self.argv[1:])
        logging.basicConfig(level=logging.DEBUG if self.args.verbose else logging.INFO,
                            format=LOG_FORMAT, stream=sys.stderr)
        self.manifest = RunManifest(command=self.argv)

        try:
            code = self.args.handler()
        except (ConfigError, InputError, NumericalError, OSError, TrialFailedError) as exc:
            code = exit_code_for(exc)
            logger.error("%s", exc)
            print(f"error: {exc}", file=sys.stderr)

        self.manifest.finish(code)
        try:
            self.manifest.write(manifest_path(self.args.primary_output()))
        except OSError as exc:
            logger.warning("Паспорт запуска не записан: %s", exc)
        return code

    # --- РАЗБОР АРГУМЕНТОВ ---

    def _build_parser(self) -> argparse.ArgumentParser:
        parser = argparse.ArgumentParser(prog="hankel-tse", description=(
            "Восстановление поля скоростей по траекториям через ганкелев тензор"))
        parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
        parser.add_argument("--verbose", "-v", action="store_true", help="журнал уровня DEBUG")
        sub = parser.add_subparsers(dest="command", required=True)

        solver = argparse.ArgumentParser(add_help=False)
        solver.add_argument("--config", help="JSON с настройками поверх configs/settings.json")
        for key, kind in SOLVER_FLAGS.items():
            solver.add_argument("--" + key.replace("_", "-"), dest=key, type=kind, default=None)
        solver.add_argument("--alphas", type=lambda s: [float(a) for a in s.split(",")], default=None,
                            help="веса мод STH-SNN через запятую")
        solver.add_argument("--seed", type=int, default=None)

        window = argparse.ArgumentParser(add_help=False)
        window.add_argument("--time-range", type=parse_range, default=None,
                            help="окно по времени, с: LO,HI (полуинтервал, сторону можно опустить)")
        window.add_argument("--position-range", type=parse_range, default=None,
                            help="окно по положению, фут: LO,HI")

        p = sub.add_parser("ingest", parents=[window], help="траектории -> сетка и маска")
        p.add_argument("--trajectories", required=True)
        p.add_argument("--ls", type=float, default=10.0)
        p.add_argument("--lt", type=float, default=5.0)
        p.add_argument("--vehicles", help="файл с номерами машин, по одному в строке")
        p.add_argument("--out-grid", required=True)
        p.add_argument("--out-mask", required=True)
        self._bind(p, self._cmd_ingest, "out_grid")

        p = sub.add_parser("split", parents=[window], help="случайная выборка обучающих машин")
        p.add_argument("--trajectories", required=True)
        p.add_argument("--fraction", type=float, required=True)
        p.add_argument("--seed", type=int, default=None)
        p.add_argument("--config")
        p.add_argument("--out", required=True)
        self._bind(p, self._cmd_split, "out")

        p = sub.add_parser("impute", parents=[solver], help="восстановить пропуски")
        p.add_argument("--method", choices=sorted(METHODS), default="sth-lrtc")
        p.add_argument("--grid", required=True)
        p.add_argument("--mask")
        p.add_argument("--out", required=True)
        p.add_argument("--trace")
        p.add_argument("--dump-tensor", help="двоичный дамп ганкелева тензора результата")
        self._bind(p, self._cmd_impute, "out")

        p = sub.add_parser("evaluate", help="MAE/RMSE по тестовым ячейкам")
        p.add_argument("--truth", required=True)
        p.add_argument("--imputed", required=True)
        p.add_argument("--train-mask", required=True)
        p.add_argument("--out", required=True)
        self._bind(p, self._cmd_evaluate, "out")

        p = sub.add_parser("trial", parents=[solver, window], help="повторные эксперименты")
        p.add_argument("--trajectories", required=True)
        p.add_argument("--fraction", type=float, default=0.05)
        p.add_argument("--n-trials", type=int, default=10)
        p.add_argument("--methods", default="sth-lrtc,mftv,sth-snn")
        p.add_argument("--ls", type=float, default=None)
        p.add_argument("--lt", type=float, default=None)
        p.add_argument("--jobs", type=int, default=1)
        p.add_argument("--out", required=True)
        self._bind(p, self._cmd_trial, "out")

        p = sub.add_parser("cep", help="накопленная доля сингулярных чисел")
        p.add_argument("--grid", required=True)
        p.add_argument("--mask")
        p.add_argument("--out", required=True)
        self._bind(p, self._cmd_cep, "out")

        p = sub.add_parser("synth", help="синтетическая задача")
        p.add_argument("--spec", required=True)
        p.add_argument("--out-truth", required=True)
        p.add_argument("--out-train", required=True)
        p.add_argument("--out-mask")
        self._bind(p, self._cmd_synth, "out_train")
        return parser

    def _bind(self, sub_parser, handler, output_attr):
        sub_parser.set_defaults(handler=handler,
                                primary_output=lambda: getattr(self.args, output_attr))

    def _settings(self) -> dict:
        args = self.args
        config = getattr(args, "config", None)
        if config:
            self.manifest.add_input(config)
        overrides = {key: getattr(args, key, None) for key in (*SOLVER_FLAGS, "alphas", "seed")}
        settings = load_settings(config, overrides)
        self.manifest.config = settings
        self.manifest.seed = settings["seed"]
        return settings

    # --- КОМАНДЫ ---

    def _cmd_ingest(self) -> int:
        args = self.args
        records = load_trajectories(args.trajectories)
        self.manifest.add_input(args.trajectories)
        vehicles = None
        if args.vehicles:
            vehicles = read_vehicle_ids(args.vehicles)
            self.manifest.add_input(args.vehicles)
        self.manifest.config = {"ls": args.ls, "lt": args.lt,
                                "time_range": args.time_range, "position_range": args.position_range}

        window = {"time_range": args.time_range, "position_range": args.position_range}
        field = trim_empty_borders(aggregate(records, args.ls, args.lt, **window))
        if vehicles is not None:
            # Поле по выбранным машинам кладётся на решётку поля по всем машинам
            subset = aggregate(records, args.ls, args.lt, vehicle_filter=vehicles, **window)
            field = crop_to(subset, field)
        write_field(field, args.out_grid, args.out_mask)
        print(f"{field.shape[0]} x {field.shape[1]}")
        return EXIT_OK

    def _cmd_split(self) -> int:
        args = self.args
        settings = self._settings()
        records = load_trajectories(args.trajectories)
        self.manifest.add_input(args.trajectories)
        if args.time_range or args.position_range:
            records = select_window(records, args.time_range, args.position_range)

        split = split_trajectories(records, args.fraction, settings["seed"])
        write_vehicle_ids(args.out, split.train_vehicle_ids)
        print(f"{len(split.train_vehicle_ids)} of "
              f"{len(split.train_vehicle_ids) + len(split.test_vehicle_ids)} vehicles")
        return EXIT_OK

    def _cmd_impute(self) -> int:
        args = self.args
        settings = self._settings()
        train = read_field(args.grid, args.mask)
        for path in (args.grid, args.mask):
            if path:
                self.manifest.add_input(path)

        result = run_method(args.method, train, settings)
        write_field(result.completed, args.out)
        if args.trace:
            result.trace.write_csv(args.trace)
        if args.dump_tensor:
            spec = EmbeddingSpec(int(settings["tau_s"]), int(settings["tau_t"]))
            dump_tensor(hankelize(result.completed.values, spec), args.dump_tensor)

        print(f"{result.method}: {result.iterations} iterations, "
              f"{'converged' if result.converged else 'not converged'}, {result.wall_time_s:.2f} s")
        return EXIT_OK if result.converged else EXIT_NOT_CONVERGED

    def _cmd_evaluate(self) -> int:
        args = self.args
        truth = read_field(args.truth)
        imputed = read_field(args.imputed)
        train_mask = read_mask(args.train_mask)
        for path in (args.truth, args.imputed, args.train_mask):
            self.manifest.add_input(path)
        if not imputed.is_complete:
            raise InputError(f"{args.imputed} has empty cells")

        report: EvalReport = score(truth, imputed, train_mask)
        write_json(args.out, report.to_json())
        print(f"MAE={report.mae:.4f} RMSE={report.rmse:.4f} n_test={report.n_test}")
        return EXIT_OK

    def _cmd_trial(self) -> int:
        args = self.args
        settings = self._settings()
        records = load_trajectories(args.trajectories)
        self.manifest.add_input(args.trajectories)

        methods = [m.strip() for m in args.methods.split(",") if m.strip()]
        ls = args.ls if args.ls is not None else settings["ls"]
        lt = args.lt if args.lt is not None else settings["lt"]
        report = run_trials(records, args.fraction, args.n_trials, methods, settings,
                            ls=ls, lt=lt, base_seed=settings["seed"], jobs=args.jobs,
                            time_range=args.time_range, position_range=args.position_range)
        report.write(args.out)
        for name, summary in report.summaries.items():
            print(f"{name}: MAE {summary.mae_mean:.3f} ({summary.mae_std:.3f}), "
                  f"RMSE {summary.rmse_mean:.3f} ({summary.rmse_std:.3f}), "
                  f"{summary.wall_s_mean:.1f} s")
        return EXIT_OK

    def _cmd_cep(self) -> int:
        args = self.args
        field = read_field(args.grid, args.mask)
        for path in (args.grid, args.mask):
            if path:
                self.manifest.add_input(path)
        values = cep(field)
        write_cep_csv(args.out, values)
        return EXIT_OK

    def _cmd_synth(self) -> int:
        args = self.args
        raw = read_config_object(args.spec)
        self.manifest.add_input(args.spec)
        spec = SyntheticSpec.from_mapping(raw)
        self.manifest.config = raw
        self.manifest.seed = spec.seed

        truth, train = synth(spec)
        write_field(truth, args.out_truth)
        write_field(train, args.out_train)
        if args.out_mask:
            write_mask(train.mask, args.out_mask)
        print(f"{spec.rows} x {spec.cols}, missing {100 * train.missing_rate:.1f}%")
        return EXIT_OK


def read_config_object(path: str | Path) -> dict:
    """JSON-объект без проверки ключей настроек (описание синтетической задачи)."""
    try:
        raw = json.loads(Path(path).read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}: {exc}") from None
    if not isinstance(raw, dict):
        raise ConfigError(f"{path}: top level must be an object")
    return raw
