"""Contains the command line interface."""
from __future__ import annotations

import argparse
import logging
import sys
from collections.abc import Callable, Sequence
from contextlib import ExitStack
from dataclasses import fields
from typing import Any, NoReturn, Optional, TextIO

import httpx

from graphsos.adapters.controller import CliController
from graphsos.domain.errors import GraphSosError
from graphsos.domain.serialization import SerializationKind

from .app import create_controller
from .backends import create_http_client
from .config import OPTIMIZERS, RunConfig, create_config, create_token_provider, load_config
from .progress import TQDMProgressView

logger = logging.getLogger(__name__)

USAGE_ERROR = 1
RUNTIME_ERROR = 2

_DEFAULTS = {field.name: field.default for field in fields(RunConfig)}
_KINDS = [kind.value for kind in SerializationKind]

# field: (flag, type, help)
_OPTIONS: dict[str, tuple[str, Callable[[str], Any], str]] = {
    "input": ("--input", str, "graph records as JSON lines"),
    "output": ("--out", str, "output file"),
    "sft_output": ("--out-sft", str, "SFT JSON lines output file"),
    "dpo_output": ("--out-dpo", str, "DPO JSON lines output file"),
    "params": ("--params", str, "attention checkpoint to load"),
    "embeddings": ("--embeddings", str, "embedding table replacing the builtin encoder"),
    "backend": ("--backend", str, "language model, mock:<mode>[,alpha=<f>][,beta=<f>][,threshold=<f>] or http:<url>"),
    "oracle": ("--oracle", str, "scoring oracle, builtin or http:<url>"),
    "endpoint": ("--endpoint", str, "chat endpoint, mock:valid, mock:no-reasoning or http:<url>"),
    "kind": ("--kind", str, "serialization kind, inferred from each graph if not given"),
    "n_max": ("--n-max", int, "node cap of sampled subgraphs"),
    "k": ("--k", int, "hop radius of sampled subgraphs"),
    "h": ("--heads", int, "number of attention heads"),
    "d": ("--dim", int, "embedding dimension of the builtin encoder"),
    "positional_buckets": ("--positional-buckets", int, "positional buckets of the builtin encoder"),
    "encoder_seed": ("--encoder-seed", int, "hashing seed of the builtin encoder"),
    "m": ("--m", int, "number of order candidates"),
    "tau": ("--tau", float, "Gumbel-softmax temperature"),
    "T": ("--t", float, "temperature of the sampler loss"),
    "lr": ("--lr", float, "learning rate"),
    "steps": ("--steps", int, "number of training steps"),
    "baseline_decay": ("--baseline-decay", float, "decay of the reward baseline"),
    "optimizer": ("--optimizer", str, "optimizer"),
    "trials": ("--trials", int, "number of trials"),
    "seed": ("--seed", int, "random seed"),
    "concurrency": ("--concurrency", int, "maximum number of concurrent backend requests"),
    "temperature": ("--temperature", float, "sampling temperature of the chat endpoint"),
    "max_tokens": ("--max-tokens", int, "maximum number of tokens per chat reply"),
    "count": ("--count", int, "number of examples to build"),
    "timeout": ("--timeout", float, "timeout of http requests in seconds"),
}
_CHOICES = {"kind": _KINDS, "optimizer": list(OPTIMIZERS)}

_ENCODER = ("embeddings", "d", "positional_buckets", "encoder_seed")

# subcommand: (help, exposed fields, required fields)
_SUBCOMMANDS: dict[str, tuple[str, tuple[str, ...], tuple[str, ...]]] = {
    "serialize": ("render every graph as text", ("input", "output", "kind"), ("input",)),
    "sample": (
        "sample a subgraph around the target of every graph",
        ("input", "output", "params", "n_max", "k", "seed", *_ENCODER),
        ("input",),
    ),
    "select-order": (
        "select a serialization order for every graph and its question",
        ("input", "output", "params", "m", "tau", "seed", "kind", *_ENCODER),
        ("input", "params"),
    ),
    "train-ssm": (
        "train the subgraph sampler against a scoring oracle",
        ("input", "output", "oracle", "n_max", "k", "steps", "lr", "T", "baseline_decay", "optimizer", "h", "seed")
        + ("timeout", *_ENCODER),
        ("input", "output"),
    ),
    "train-osm": (
        "train the order selector against a frozen language model",
        ("input", "output", "backend", "m", "tau", "steps", "lr", "baseline_decay", "optimizer", "h", "seed", "kind")
        + ("concurrency", "timeout", *_ENCODER),
        ("input", "output", "backend"),
    ),
    "cot-build": (
        "distill Graph-CoT answers into SFT and DPO datasets",
        ("input", "endpoint", "sft_output", "dpo_output", "temperature", "max_tokens", "kind", "concurrency")
        + ("timeout",),
        ("input", "endpoint", "sft_output", "dpo_output"),
    ),
    "bench-order": (
        "measure answer accuracy across random serialization orders",
        ("input", "output", "backend", "trials", "seed", "concurrency", "kind", "params", "m", "tau", "timeout")
        + _ENCODER,
        ("input", "backend"),
    ),
    "metrics": ("compute graph metrics", ("input", "output"), ("input",)),
    "scoring-data": (
        "build training data for a scoring model",
        ("input", "output", "count", "seed"),
        ("input",),
    ),
    "synth": ("generate a labeled graph with planted homophily", ("output", "seed"), ()),
}

_LINE_OUTPUTS = {"serialize", "sample", "select-order", "metrics", "scoring-data", "synth"}


class ArgumentParser(argparse.ArgumentParser):
    """A parser printing its help text and exiting with the usage error status on bad input."""

    def error(self, message: str) -> NoReturn:
        """Print the help text and the message, then exit."""
        self.print_help(sys.stderr)
        self.exit(USAGE_ERROR, f"{self.prog}: error: {message}\n")


def _seed_or_identity(value: str) -> Optional[int]:
    if value == "identity":
        return None
    try:
        seed = int(value)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected an integer seed or 'identity', got {value!r}") from None
    if seed < 0:
        raise argparse.ArgumentTypeError(f"seed must not be negative, got {seed}")
    return seed


def _ints(value: str) -> tuple[int, ...]:
    try:
        return tuple(int(item) for item in value.split(",") if item)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma separated integers, got {value!r}") from None


def _strings(value: str) -> tuple[str, ...]:
    return tuple(item.strip() for item in value.split(",") if item.strip())


def _add_option(parser: argparse.ArgumentParser, name: str) -> None:
    flag, kind, text = _OPTIONS[name]
    default = _DEFAULTS[name]
    parser.add_argument(
        flag,
        dest=name,
        type=kind,
        choices=_CHOICES.get(name),
        default=argparse.SUPPRESS,
        help=f"{text} (default: {'unset' if default is None else default})",
    )


def _add_extras(name: str, parser: argparse.ArgumentParser) -> None:
    if name == "serialize":
        parser.add_argument(
            "--seed",
            dest="order_seed",
            type=_seed_or_identity,
            default=None,
            help="seed of the random node ordering or 'identity' (default: identity)",
        )
    elif name == "sample":
        parser.add_argument("--target", type=int, default=None, help="target node of every graph (default: record)")
    elif name == "train-osm":
        parser.add_argument(
            "--exact-expectation",
            dest="exact_expectation",
            action="store_true",
            default=argparse.SUPPRESS,
            help="evaluate the loss of every candidate (default: False)",
        )
    elif name == "bench-order":
        parser.add_argument("--labels", type=_strings, default=(), help="comma separated class labels (default: none)")
        parser.add_argument(
            "--pin-identity-first", action="store_true", help="use the identity order in trial 0 (default: False)"
        )
        parser.add_argument(
            "--use-selector", action="store_true", help="choose orders with the trained selector (default: False)"
        )
        parser.add_argument(
            "--m-sweep", type=_ints, default=(), help="comma separated candidate counts to sweep (default: none)"
        )
    elif name == "metrics":
        parser.add_argument(
            "--homophily", action="store_true", help="report edge homophily (default: on without --same-class)"
        )
        parser.add_argument(
            "--same-class", action="store_true", help="report the same-class neighbor proportion (default: False)"
        )
        parser.add_argument("--target", type=int, default=None, help="target node of --same-class (default: none)")
    elif name == "synth":
        parser.add_argument("--n", type=int, default=100, help="number of nodes (default: 100)")
        parser.add_argument("--classes", type=int, default=2, help="number of classes (default: 2)")
        parser.add_argument("--target-h", type=float, default=0.5, help="target edge homophily (default: 0.5)")
        parser.add_argument("--mean-degree", type=float, default=4.0, help="mean node degree (default: 4.0)")


def create_parser() -> tuple[ArgumentParser, dict[str, ArgumentParser]]:
    """Create the parser and return it together with the parsers of the subcommands."""
    parser = ArgumentParser(prog="graphsos", description="Graph sampling and order selection for language models.")
    parser.add_argument("--config", default=None, help="flat key = value configuration file (default: none)")
    parser.add_argument(
        "--log-level",
        default="WARNING",
        choices=["DEBUG", "INFO", "WARNING", "ERROR"],
        help="logging level (default: WARNING)",
    )
    parser.add_argument("--progress", action="store_true", help="show progress bars (default: False)")
    subparsers = parser.add_subparsers(dest="command", required=True, metavar="COMMAND")
    children: dict[str, ArgumentParser] = {}
    for name, (text, options, _) in _SUBCOMMANDS.items():
        child = subparsers.add_parser(name, help=text, description=text)
        for option in options:
            _add_option(child, option)
        _add_extras(name, child)
        children[name] = child
    return parser, children


def _dispatch(command: str, controller: CliController, config: RunConfig, args: argparse.Namespace) -> None:
    if command == "serialize":
        controller.serialize(config.kind, args.order_seed)
    elif command == "sample":
        controller.sample(config.n_max, config.k, config.seed, args.target)
    elif command == "select-order":
        controller.select_order(config.m, config.tau, config.seed, config.kind)
    elif command == "train-ssm":
        controller.train_ssm(
            n_max=config.n_max,
            k=config.k,
            steps=config.steps,
            lr=config.lr,
            T=config.T,
            baseline_decay=config.baseline_decay,
            optimizer=config.optimizer,
            heads=config.h,
            seed=config.seed,
        )
    elif command == "train-osm":
        controller.train_osm(
            m=config.m,
            tau=config.tau,
            steps=config.steps,
            lr=config.lr,
            baseline_decay=config.baseline_decay,
            exact_expectation=config.exact_expectation,
            optimizer=config.optimizer,
            heads=config.h,
            seed=config.seed,
            kind=config.kind,
        )
    elif command == "cot-build":
        controller.build_cot_data(config.temperature, config.max_tokens, config.kind)
    elif command == "bench-order":
        controller.bench_order(
            trials=config.trials,
            seed=config.seed,
            labels=args.labels,
            pin_identity_first=args.pin_identity_first,
            use_selector=args.use_selector,
            m=config.m,
            tau=config.tau,
            m_sweep=args.m_sweep,
            kind=config.kind,
        )
    elif command == "metrics":
        controller.metrics(
            homophily=args.homophily or not args.same_class,
            same_class_target=args.target if args.same_class else None,
        )
    elif command == "scoring-data":
        controller.scoring_data(config.count, config.seed)
    elif command == "synth":
        controller.synth(args.n, args.classes, args.target_h, config.seed, args.mean_degree)


def _check_usage(command: str, parser: ArgumentParser, config: RunConfig, args: argparse.Namespace) -> None:
    missing = [_OPTIONS[name][0] for name in _SUBCOMMANDS[command][2] if getattr(config, name) is None]
    if missing:
        parser.error(f"missing required setting(s) {', '.join(missing)}")
    if command == "metrics" and args.same_class and args.target is None:
        parser.error("--same-class needs --target")
    if command == "bench-order" and (args.use_selector or args.m_sweep) and config.params is None:
        parser.error("--use-selector and --m-sweep need --params")


def _run(command: str, config: RunConfig, args: argparse.Namespace, stdout: TextIO) -> None:
    with ExitStack() as stack:
        out = stdout
        if command in _LINE_OUTPUTS and config.output is not None:
            out = stack.enter_context(open(config.output, "w", encoding="utf-8"))

        def emit(line: str) -> None:
            out.write(line + "\n")

        clients: list[httpx.Client] = []

        def client() -> httpx.Client:
            if not clients:
                clients.append(create_http_client(create_token_provider(), config.timeout))
                stack.callback(clients[0].close)
            return clients[0]

        progress_view = TQDMProgressView()
        if args.progress:
            progress_view.enable()
        controller = create_controller(config, emit=emit, progress_view=progress_view, client=client)
        _dispatch(command, controller, config, args)


def main(argv: Optional[Sequence[str]] = None) -> int:
    """Run the command line interface and return its exit status."""
    parser, children = create_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exit_:
        return exit_.code if isinstance(exit_.code, int) else USAGE_ERROR
    logging.basicConfig(level=args.log_level, format="%(levelname)s %(name)s: %(message)s")
    logging.captureWarnings(True)
    command: str = args.command
    child = children[command]
    flags = {name: getattr(args, name) for name in _SUBCOMMANDS[command][1] if hasattr(args, name)}
    if hasattr(args, "exact_expectation"):
        flags["exact_expectation"] = args.exact_expectation
    try:
        file_values = {} if args.config is None else load_config(args.config)
        config = create_config(file_values, flags)
    except (OSError, ValueError) as error:
        child.print_help(sys.stderr)
        print(f"graphsos {command}: error: {error}", file=sys.stderr)
        return USAGE_ERROR
    try:
        _check_usage(command, child, config, args)
    except SystemExit as exit_:
        return exit_.code if isinstance(exit_.code, int) else USAGE_ERROR
    logger.info(f"Running {command} with {config}")
    try:
        _run(command, config, args, sys.stdout)
    except (GraphSosError, OSError, ValueError, KeyError) as error:
        print(f"graphsos {command}: error: {error}", file=sys.stderr)
        return RUNTIME_ERROR
    return 0
