"""Command-line interface.

Settings resolve as built-in defaults, then ``--config`` file entries
(``key = value`` lines), then command-line flags. The resolved settings are
echoed at the top of every report.
"""

import argparse
import logging
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .errors import InvalidUserError, KGError, UnknownEntityError
from .evaluation import RankingConfig, evaluate, format_report
from .graph import (
    LIKES_RESEARCH_TWEET,
    TW52_RELATIONS,
    TWEET,
    build_graph,
    infer_ontology,
    uses_tw52_relations,
)
from .ingest import SplitSpec, read_kinds, read_triples, split, write_triples
from .models import ModelConfig, load_checkpoint, save_checkpoint, train
from .recommender import ProbabilityBasis, cohort_analysis, recommend
from .synthetic import KINDS, SyntheticSpec, generate_dataset

log = logging.getLogger("medkg")

# Reference values for the TW52 graph, used as comparison rows.
TW52_REFERENCE = {
    "transe": {"mr": 1327, "mrr": 0.021, "hit@1": 0.005, "hit@3": 0.019, "hit@10": 0.048},
    "mde": {"mr": 1287, "mrr": 0.148, "hit@1": 0.071, "hit@3": 0.161, "hit@10": 0.332},
}

MODEL_KEYS = (
    "model", "dim", "norm_p", "psi", "gamma1", "gamma2", "beta1", "beta2", "margin",
    "w1", "w2", "w3", "learning_rate", "iterations", "negatives_per_positive",
    "batch_size", "loss", "seed",
)


class UsageError(Exception):
    pass


def _bool(text):
    if isinstance(text, bool):
        return text
    value = str(text).strip().lower()
    if value in ("1", "true", "yes", "on"):
        return True
    if value in ("0", "false", "no", "off"):
        return False
    raise argparse.ArgumentTypeError(f"not a boolean: {text!r}")


def _int_list(text):
    if isinstance(text, (list, tuple)):
        return tuple(int(x) for x in text)
    return tuple(int(x) for x in str(text).replace(",", " ").split())


class Options:
    """Collects option defaults and converters for one subcommand."""

    def __init__(self, parser):
        self.parser = parser
        self.defaults = {}
        self.types = {}
        self.required = set()

    def add(self, *flags, default=None, type=str, required=False, help=None, **kw):
        action = self.parser.add_argument(
            *flags, default=argparse.SUPPRESS, type=type, help=help, **kw
        )
        self.defaults[action.dest] = default
        self.types[action.dest] = type
        if required:
            self.required.add(action.dest)
        return action

    def flag(self, *flags, help=None):
        action = self.parser.add_argument(
            *flags, action="store_const", const=True, default=argparse.SUPPRESS, help=help
        )
        self.defaults[action.dest] = False
        self.types[action.dest] = _bool
        return action


def read_config(path):
    """Parse a flat ``key = value`` file; ``#`` starts a comment line."""
    out = {}
    for lineno, raw in enumerate(Path(path).read_text(encoding="utf-8").splitlines(), 1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        if "=" not in line:
            raise UsageError(f"{path}:{lineno}: expected key = value")
        key, value = (x.strip() for x in line.split("=", 1))
        out[key.replace("-", "_")] = value
    return out


def resolve(opts, ns):
    """Merge defaults < config file < flags and check required options."""
    resolved = dict(opts.defaults)
    cfg_path = getattr(ns, "config", None)
    if cfg_path:
        try:
            entries = read_config(cfg_path)
        except OSError as exc:
            raise UsageError(f"cannot read config {cfg_path}: {exc}") from exc
        for key, value in entries.items():
            if key not in opts.types:
                raise UsageError(f"{cfg_path}: unknown setting {key!r}")
            try:
                resolved[key] = opts.types[key](value)
            except (ValueError, argparse.ArgumentTypeError) as exc:
                raise UsageError(f"{cfg_path}: bad value for {key}: {value!r}") from exc
    for key in opts.defaults:
        if hasattr(ns, key):
            resolved[key] = getattr(ns, key)
    missing = sorted(k for k in opts.required if resolved.get(k) in (None, ""))
    if missing:
        flags = ", ".join("--" + k.replace("_", "-") for k in missing)
        raise UsageError(f"the following arguments are required: {flags}")
    return resolved


def config_echo(command, settings):
    lines = [f"medkg {__version__} {command}"]
    for key in sorted(settings):
        value = settings[key]
        if isinstance(value, tuple):
            value = ",".join(str(x) for x in value)
        lines.append(f"{key} = {value}")
    return lines


def _fmt(value):
    if isinstance(value, float):
        return repr(value)
    return str(value)


def write_kv(path, header, values):
    """Machine-readable report: ``# header`` lines then ``key=value`` lines."""
    lines = [f"# {h}" for h in header]
    lines += [f"{k}={_fmt(v)}" for k, v in values.items()]
    Path(path).parent.mkdir(parents=True, exist_ok=True)
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")


def _emit(text, path):
    sys.stdout.write(text)
    if path:
        Path(path).parent.mkdir(parents=True, exist_ok=True)
        Path(path).write_text(text, encoding="utf-8")


def _kv_path(settings):
    if settings.get("kv"):
        return settings["kv"]
    if settings.get("report"):
        return str(Path(settings["report"]).with_suffix(".kv"))
    return None


# ----------------------------------------------------------------------
# data helpers
# ----------------------------------------------------------------------


def load_graph(settings):
    labeled = read_triples(settings["data"], lenient=settings.get("lenient", False))
    order = TW52_RELATIONS if uses_tw52_relations(labeled) else None
    graph = build_graph(labeled, relation_order=order)
    if order is not None:
        kinds = read_kinds(settings["kinds"]) if settings.get("kinds") else None
        graph = graph.with_ontology(infer_ontology(graph, kinds))
    log.info("loaded %s (%d duplicates dropped)", graph, graph.duplicates)
    return graph


def triples_from_file(graph, path, lenient=False):
    vocab = graph.vocabulary
    rows = [
        (vocab.entity_id(h), vocab.relation_id(r), vocab.entity_id(t))
        for h, r, t in read_triples(path, lenient=lenient)
    ]
    return np.array(rows, dtype=np.int64).reshape(-1, 3)


def model_config(settings, model=None):
    values = {k: settings[k] for k in MODEL_KEYS if settings.get(k) is not None}
    if model is not None:
        values["model"] = model
        values.pop("dim", None)
        values.pop("loss", None)
        for key in ("dim", "loss"):
            value = settings.get(f"{model}_{key}")
            if value is not None:
                values[key] = value
    return ModelConfig(**values)


def _with_model(settings, configs):
    """Settings with raw model flags replaced by the resolved config values."""
    out = {k: v for k, v in settings.items() if v is not None or k not in MODEL_KEYS}
    for k in list(out):
        if k.startswith(("transe_", "mde_")) or k in MODEL_KEYS:
            del out[k]
    for prefix, config in configs.items():
        for k, v in config.to_dict().items():
            out[f"{prefix}.{k}" if prefix else k] = v
    return out


# ----------------------------------------------------------------------
# subcommands
# ----------------------------------------------------------------------


def cmd_generate(s):
    params = {k: s[k] for k in (
        "kind", "n_users", "n_tweets", "mean_degree", "rewire_probability", "seed",
        "likes_per_user", "hub_count", "hub_factor", "job_fraction", "n_new_users",
        "holdout_fraction",
    ) if s.get(k) is not None}
    spec = SyntheticSpec.from_mapping(params)
    ds = generate_dataset(spec)
    header = "\n".join(config_echo("generate", s))
    write_triples(ds.graph, s["out"], header=header)
    out = Path(s["out"])
    if spec.kind != "small_world_social":
        write_triples(ds.graph.with_triples(ds.train), out.with_suffix(".train.tsv"), header)
        write_triples(ds.graph.with_triples(ds.test), out.with_suffix(".test.tsv"), header)
    print(f"wrote {len(ds.graph)} triples over {ds.graph.entity_count} entities to {out}")
    return 0


def cmd_split(s):
    graph = load_graph(s)
    spec = SplitSpec(s["train_fraction"], s["seed"], s["stratified"])
    tr, te = split(graph, spec)
    out = Path(s["out_dir"])
    header = "\n".join(config_echo("split", s))
    write_triples(graph.with_triples(tr), out / "train.tsv", header)
    write_triples(graph.with_triples(te), out / "test.tsv", header)
    print(f"train {len(tr)} / test {len(te)} triples written to {out}")
    return 0


def _train_graph(graph, s):
    if s.get("train"):
        return graph.with_triples(triples_from_file(graph, s["train"], s.get("lenient", False)))
    return graph


def cmd_train(s):
    graph = load_graph(s)
    tgraph = _train_graph(graph, s)
    config = model_config(s)
    space, report = train(tgraph, config)
    save_checkpoint(space, config, s["checkpoint"])
    header = config_echo("train", _with_model(s, {"": config}))
    values = {
        "model": config.model,
        "train_triples": len(tgraph),
        "final_loss": report.loss_trace[-1],
        "train_hit@1": report.train_hit1,
    }
    text = "\n".join(f"# {h}" for h in header) + "\n"
    text += "".join(f"{k:<14} {_fmt(v)}\n" for k, v in values.items())
    text += f"{'wall_time':<14} {report.wall_time:.2f}s\n"
    _emit(text, s.get("report"))
    if _kv_path(s):
        write_kv(_kv_path(s), header, values)
    return 0


def _space(s, graph):
    return load_checkpoint(s["checkpoint"], graph.entity_count, graph.relation_count)


def cmd_evaluate(s):
    graph = load_graph(s)
    space, config = _space(s, graph)
    test = triples_from_file(graph, s["test"], s.get("lenient", False))
    rconf = RankingConfig(s["mode"], s["hits"], s["tie_policy"])
    rep = evaluate(space, test, graph, rconf, workers=s["workers"])
    header = config_echo("evaluate", s)
    _emit(format_report({config.model: rep}, header_lines=header), s.get("report"))
    if _kv_path(s):
        values = {f"{config.model}.{k}": v for k, v in rep.as_dict().items()}
        if s.get("dump_ranks"):
            values.update(_rank_dump(graph, rep, config.model))
        write_kv(_kv_path(s), header, values)
    return 0


def _rank_dump(graph, rep, prefix):
    ents = graph.vocabulary.entity_labels
    rels = graph.vocabulary.relation_labels
    out = {}
    for i, (tr, side, rank) in enumerate(rep.per_query_ranks):
        out[f"{prefix}.rank.{i}"] = f"{ents[tr.head]}\t{rels[tr.relation]}\t{ents[tr.tail]}\t{side}\t{rank!r}"
    return out


def cmd_recommend(s):
    graph = load_graph(s)
    space, _ = _space(s, graph)
    tgraph = _train_graph(graph, s)
    vocab = graph.vocabulary
    try:
        user = vocab.entity_id(s["user"])
    except UnknownEntityError:
        raise InvalidUserError(f"unknown user {s['user']!r}") from None
    rel = vocab.relation_id(LIKES_RESEARCH_TWEET)
    basis = ProbabilityBasis.from_training(space, tgraph.triples, rel, clamp=not s["no_clamp"])
    recs = recommend(space, graph, user, s["k"], basis)
    header = config_echo("recommend", s)
    lines = [f"# {h}" for h in header]
    lines.append(f"{'rank':>4}  {'user':<16} {'tweet':<16} {'score':>10} {'probability':>11}")
    for i, rec in enumerate(recs, 1):
        lines.append(
            f"{i:>4}  {vocab.entity_label(rec.user):<16} {vocab.entity_label(rec.tweet):<16} "
            f"{rec.score:10.4f} {rec.probability:11.4f}"
        )
    _emit("\n".join(lines) + "\n", s.get("report"))
    if _kv_path(s):
        values = {
            f"rec.{i}": f"{vocab.entity_label(r.user)}\t{vocab.entity_label(r.tweet)}\t{r.score!r}\t{r.probability!r}"
            for i, r in enumerate(recs, 1)
        }
        write_kv(_kv_path(s), header, values)
    return 0


def _default_target(graph):
    """Most liked post, lowest id on ties."""
    rel = graph.vocabulary.relation_id(LIKES_RESEARCH_TWEET)
    tweets = graph.ontology.entities_of_kind(TWEET)
    counts = np.bincount(graph.triples[graph.triples[:, 1] == rel, 2], minlength=graph.entity_count)
    return max(tweets, key=lambda t: (counts[t], -t))


def cmd_cohorts(s):
    graph = load_graph(s)
    if graph.ontology is None:
        raise KGError("cohort analysis needs a graph using the social ontology relations")
    space, _ = _space(s, graph)
    tgraph = _train_graph(graph, s)
    vocab = graph.vocabulary
    target = vocab.entity_id(s["target"]) if s.get("target") else _default_target(graph)
    lo_hi = s["b_following"]
    b_range = (lo_hi[0], lo_hi[-1])
    rows = cohort_analysis(
        space, graph, tgraph.triples, target,
        group_size=s["group_size"],
        hub_min_followers=s["hub_min_followers"],
        b_following=b_range,
        similarity=s["similarity"],
        user_class=s.get("user_class"),
    )
    header = config_echo("cohorts", s) + [f"target = {vocab.entity_label(target)}"]
    width = max(len(r.description) for r in rows)
    lines = [f"# {h}" for h in header]
    lines.append(f"{'User group':<{width}}  {'n':>3}  {'Mean P (clamped)':>16}  {'Mean P (raw)':>12}")
    values = {"target": vocab.entity_label(target)}
    for r in rows:
        c = "-" if r.mean_probability is None else f"{r.mean_probability:.3f}"
        u = "-" if r.mean_probability_unclamped is None else f"{r.mean_probability_unclamped:.3f}"
        lines.append(f"{r.description:<{width}}  {len(r.members):>3}  {c:>16}  {u:>12}")
        values[f"{r.name}.size"] = len(r.members)
        values[f"{r.name}.mean_probability"] = r.mean_probability
        values[f"{r.name}.mean_probability_unclamped"] = r.mean_probability_unclamped
        values[f"{r.name}.members"] = ",".join(vocab.entity_label(m) for m in r.members)
    _emit("\n".join(lines) + "\n", s.get("report"))
    if _kv_path(s):
        write_kv(_kv_path(s), header, values)
    return 0


def cmd_reproduce(s):
    graph = load_graph(s)
    tr, te = split(graph, SplitSpec(s["train_fraction"], s["seed"], s["stratified"]))
    tgraph = graph.with_triples(tr)
    out = Path(s["out"])
    out.mkdir(parents=True, exist_ok=True)
    rconf = RankingConfig(s["mode"], s["hits"], s["tie_policy"])
    reports, fits, configs = {}, {}, {}
    for model in ("transe", "mde"):
        config = configs[model] = model_config(s, model)
        log.info("training %s on %d triples", model, len(tr))
        space, trep = train(tgraph, config)
        save_checkpoint(space, config, out / f"{model}.npz")
        reports[model] = evaluate(space, te, graph, rconf, workers=s["workers"])
        fits[model] = trep
    header = config_echo("reproduce", _with_model(s, configs)) + [
        f"graph = {graph.entity_count} entities, {graph.relation_count} relations, {len(graph)} triples",
        f"split = {len(tr)} train, {len(te)} test",
    ]
    text = format_report(
        {"TransE": reports["transe"], "MDE": reports["mde"]},
        title="Link prediction, head and tail queries pooled",
        header_lines=header,
    )
    for side in ("head", "tail"):
        lines = [f"\n{side} queries only"]
        for name, key in (("TransE", "transe"), ("MDE", "mde")):
            m = reports[key].by_side[side]
            hits = "  ".join(f"Hit@{n}={v:.4f}" for n, v in m.hits.items())
            lines.append(f"  {name:<6} MR={m.mr:.2f}  MRR={m.mrr:.4f}  {hits}")
        text += "\n".join(lines) + "\n"
    text += "\nreference on TW52\n"
    for key, name in (("transe", "TransE"), ("mde", "MDE")):
        ref = TW52_REFERENCE[key]
        text += f"  {name:<6} " + "  ".join(f"{k}={v}" for k, v in ref.items()) + "\n"
    text += "\ntraining fit (filtered hit@1 on training triples)\n"
    for key, name in (("transe", "TransE"), ("mde", "MDE")):
        text += f"  {name:<6} {fits[key].train_hit1:.4f}\n"
    _emit(text, out / "report.txt")

    values = {"train_triples": len(tr), "test_triples": len(te)}
    for key in ("transe", "mde"):
        values.update({f"{key}.{k}": v for k, v in reports[key].as_dict().items()})
        values[f"{key}.train_hit@1"] = fits[key].train_hit1
        values[f"{key}.final_loss"] = fits[key].loss_trace[-1]
    if s.get("dump_ranks"):
        for key in ("transe", "mde"):
            values.update(_rank_dump(graph, reports[key], key))
    write_kv(out / "report.kv", header, values)
    return 0


# ----------------------------------------------------------------------
# parser
# ----------------------------------------------------------------------


def _data_opts(o, required=True):
    o.add("--data", required=required, help="triple file (head<TAB>relation<TAB>tail)")
    o.flag("--lenient", help="split lines on any whitespace")
    o.add("--kinds", help="optional label<TAB>kind annotations (user, tweet, job_class)")


def _model_opts(o, per_model=False):
    if not per_model:
        o.add("--model", default="transe", choices=("transe", "mde"))
        o.add("--dim", type=int)
        o.add("--loss", choices=("margin", "limit"))
    else:
        o.add("--transe-dim", type=int)
        o.add("--mde-dim", type=int)
        o.add("--transe-loss", choices=("margin", "limit"))
        o.add("--mde-loss", choices=("margin", "limit"))
    o.add("--norm-p", type=int, choices=(1, 2))
    for name in ("psi", "gamma1", "gamma2", "beta1", "beta2", "margin", "w1", "w2", "w3"):
        o.add(f"--{name}", type=float)
    o.add("--learning-rate", type=float)
    o.add("--iterations", type=int)
    o.add("--negatives-per-positive", "--negatives", type=int)
    o.add("--batch-size", type=int)


def _rank_opts(o):
    o.add("--mode", default="raw", choices=("raw", "filtered"))
    o.add("--hits", default=(1, 3, 10), type=_int_list, help="comma-separated N values")
    o.add("--tie-policy", default="mean", choices=("mean", "optimistic", "pessimistic"))
    o.add("--workers", default=1, type=int)
    o.flag("--dump-ranks", help="add per-query ranks to the machine-readable report")


def build_parser():
    parser = argparse.ArgumentParser(prog="medkg", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"medkg {__version__}")
    parser.add_argument("-v", "--verbose", action="count", default=0)
    sub = parser.add_subparsers(dest="command", metavar="COMMAND")
    registry = {}

    def command(name, func, help):
        p = sub.add_parser(name, help=help, description=help)
        p.add_argument("--config", help="key = value settings file")
        o = Options(p)
        registry[name] = (o, func)
        return o

    o = command("generate", cmd_generate, "write a synthetic knowledge graph")
    o.add("--kind", default="small_world_social", choices=KINDS)
    o.add("--n-users", type=int)
    o.add("--n-tweets", type=int)
    o.add("--mean-degree", type=int)
    o.add("--rewire-probability", type=float)
    o.add("--likes-per-user", type=float)
    o.add("--hub-count", type=int)
    o.add("--hub-factor", type=float)
    o.add("--job-fraction", type=float)
    o.add("--n-new-users", type=int)
    o.add("--holdout-fraction", type=float)
    o.add("--seed", default=0, type=int)
    o.add("--out", required=True)

    o = command("split", cmd_split, "uniform random train/test split")
    _data_opts(o)
    o.add("--train-fraction", default=0.8, type=float)
    o.add("--seed", default=0, type=int)
    o.flag("--stratified", help="apply the split per relation")
    o.add("--out-dir", required=True)

    o = command("train", cmd_train, "train one model and write a checkpoint")
    _data_opts(o)
    o.add("--train", help="training triples (default: all of --data)")
    _model_opts(o)
    o.add("--seed", default=0, type=int)
    o.add("--checkpoint", required=True)
    o.add("--report")
    o.add("--kv")

    o = command("evaluate", cmd_evaluate, "rank test triples with a trained model")
    _data_opts(o)
    o.add("--test", required=True)
    o.add("--checkpoint", required=True)
    _rank_opts(o)
    o.add("--report")
    o.add("--kv")

    o = command("recommend", cmd_recommend, "suggest research posts to a user")
    _data_opts(o)
    o.add("--train", help="training triples for the probability basis (default: --data)")
    o.add("--checkpoint", required=True)
    o.add("--user", required=True)
    o.add("-k", "--k", default=10, type=int)
    o.flag("--no-clamp", help="report the unbounded score ratio")
    o.add("--report")
    o.add("--kv")

    o = command("cohorts", cmd_cohorts, "mean like-probability of user groups for one post")
    _data_opts(o)
    o.add("--train", help="training triples for the probability basis (default: --data)")
    o.add("--checkpoint", required=True)
    o.add("--target", help="post label (default: the most liked post)")
    o.add("--hub-min-followers", default=200, type=int)
    o.add("--b-following", default=(25, 25), type=_int_list, help="N or LO,HI")
    o.add("--similarity", default=0.9, type=float)
    o.add("--group-size", default=5, type=int)
    o.add("--user-class", choices=("physician", "medical_researcher"))
    o.add("--report")
    o.add("--kv")

    o = command("reproduce", cmd_reproduce, "split, train TransE and MDE, evaluate both")
    _data_opts(o)
    o.add("--train-fraction", default=0.8, type=float)
    o.flag("--stratified", help="apply the split per relation")
    _model_opts(o, per_model=True)
    o.add("--seed", default=0, type=int)
    _rank_opts(o)
    o.add("--out", required=True)
    return parser, registry


def run(argv=None):
    """Entry point; returns the process exit code."""
    parser, registry = build_parser()
    try:
        ns = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    logging.basicConfig(
        level=logging.WARNING - 10 * min(ns.verbose, 2),
        format="%(levelname)s %(name)s: %(message)s",
    )
    if ns.command is None:
        parser.print_usage(sys.stderr)
        return 2
    opts, func = registry[ns.command]
    try:
        settings = resolve(opts, ns)
    except UsageError as exc:
        opts.parser.print_usage(sys.stderr)
        print(f"medkg {ns.command}: error: {exc}", file=sys.stderr)
        return 2
    try:
        return func(settings)
    except KGError as exc:
        print(f"medkg {ns.command}: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 1


def main():
    sys.exit(run())


if __name__ == "__main__":
    main()
