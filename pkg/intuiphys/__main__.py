"""
This file is part of intuiphys.

intuiphys is free software: you can redistribute it and/or modify it
under the terms of the GNU General Public License as published by the
Free Software Foundation, either version 3 of the License, or (at your
option) any later version.

intuiphys is distributed in the hope that it will be useful, but
WITHOUT ANY WARRANTY; without even the implied warranty of
MERCHANTABILITY or FITNESS FOR A PARTICULAR PURPOSE.  See the GNU
General Public License for more details.

You should have received a copy of the GNU General Public License
along with intuiphys.  If not, see <https://www.gnu.org/licenses/>.

Copyright 2024-2026
The intuiphys developers
"""

import os
import sys
import signal
import shutil
import logging
import argparse
from concurrent.futures import ThreadPoolExecutor

from .version import __version__
from .config import Config, ConfigError
from .physics import PhysicsError
from .render import RenderError, DEFAULT_PALETTE, FrameRenderer
from .codecs import CodecError, encode_ppm, encode_pgm16, encode_raw, write
from .experience import ExperienceError, DYNAMIC, MEDIAN, summarize_run, normalize_for_display
from .families import FamilyError
from .dataset import DatasetError, DESK_PRESET, generate, gt_obstacle_mask
from .store import (
    Store,
    StoreError,
    StoreUninitializedError,
    StoreInitializationError,
)
from .masknet import MaskNetError, ConvRegressor, train, evaluate_mask_error, write_loss_csv
from .evaluate import (
    EvalError,
    DEFAULT_HORIZONS,
    evaluate_baseline,
    experience_sweep,
    ablation_sweep,
    write_mask_csv,
)


PROG = 'intuiphys'

LOG_LEVEL = os.getenv('LOG_LEVEL', 'WARNING').upper()
LOG_FILE = os.getenv('INTUIPHYS_LOG_FILE')

# errors in user input or data; anything else is an internal error
USER_ERRORS = (
    PhysicsError,
    RenderError,
    CodecError,
    ExperienceError,
    FamilyError,
    DatasetError,
    StoreError,
    MaskNetError,
    EvalError,
    ConfigError,
    OSError,
)

ABLATE = {
    'none': 'none',
    'dynamic': 'zero_dynamic',
    'median': 'zero_median',
}

log = logging.getLogger(PROG)

########################################################################


def load_config(args, scenario=None, train=None):
    config = Config.read(args.config) if args.config else Config()
    overrides = dict(DESK_PRESET) if getattr(args, 'desk', False) else {}
    overrides.update({k: v for k, v in (scenario or {}).items() if v is not None})
    return config.override(overrides, train)


def dump_config(args, config):
    if args.dump_config:
        print(config.dumps())
        return True
    return False


def open_store(path):
    try:
        return Store(path)
    except (StoreUninitializedError, StoreInitializationError) as e:
        print(e, file=sys.stderr)
        sys.exit("Generate a dataset with 'gen' first.")


def prepare_outdir(path, force):
    if os.path.exists(path) and os.listdir(path):
        if not force:
            sys.exit(f"Output directory '{path}' exists but is not empty (use --force to overwrite).")
        shutil.rmtree(path)
    os.makedirs(path, exist_ok=True)


def parse_ints(string):
    try:
        return [int(v) for v in string.split(',') if v.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma separated integers, got '{string}'")


def pmap(func, items, threads):
    if threads <= 1:
        return [func(i) for i in items]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(func, items))


def progress(msg):
    print(msg, end=' ', file=sys.stderr, flush=True)


def done():
    print("done.", file=sys.stderr)


def add_train_args(parser):
    parser.add_argument(
        '--n', type=int, default=7, metavar='N',
        help="experience runs used per sample (0 uses the pseudo-experience)",
    )
    parser.add_argument(
        '--ablate', choices=sorted(ABLATE), default=None,
        help="zero the dynamic or median channels of the summaries",
    )
    parser.add_argument(
        '--epochs', type=int,
        help="training epochs",
    )
    parser.add_argument(
        '--lr', type=float,
        help="SGD learning rate",
    )
    parser.add_argument(
        '--batch-size', type=int,
        help="minibatch size",
    )
    parser.add_argument(
        '--seed', type=int,
        help="training seed",
    )


def train_overrides(args):
    return {
        'epochs': args.epochs,
        'learning_rate': args.lr,
        'batch_size': args.batch_size,
        'seed': args.seed,
        'channel_ablation': ABLATE[args.ablate] if args.ablate else None,
    }

########################################################################


def cmd_gen(parser, args=None):
    """generate a dataset of meta-samples

Each meta-sample is a scenario with one prediction run and N
experience runs.  Sample i is generated from a seed derived from the
master seed and i, so the output does not depend on --threads.

    """
    if args is None:
        parser.add_argument(
            'out',
            help="output dataset directory",
        )
        parser.add_argument(
            '--seed', type=int, required=True,
            help="master seed",
        )
        parser.add_argument(
            '--count', type=int, default=200,
            help="number of meta-samples (default: 200)",
        )
        parser.add_argument(
            '--family', choices=['r2', 'r4', 'c'],
            help="scenario family",
        )
        parser.add_argument(
            '--board-size', type=int,
            help="board side length in pixels",
        )
        parser.add_argument(
            '--background', choices=['solid', 'texture'],
            help="background style",
        )
        parser.add_argument(
            '--balls', type=int,
            help="balls in the prediction run",
        )
        parser.add_argument(
            '--experience-balls', type=int,
            help="balls per experience run (default: 1, or random up to --balls)",
        )
        parser.add_argument(
            '--n', type=int, default=7, metavar='N',
            help="experience runs per sample (default: 7)",
        )
        parser.add_argument(
            '--pred-frames', type=int, default=100,
            help="frames in the prediction run (default: 100)",
        )
        parser.add_argument(
            '--frames', action='store_true',
            help="also write every frame as PPM",
        )
        parser.add_argument(
            '--desk', action='store_true',
            help="desk-scale preset (32x32 boards, small obstacles)",
        )
        return

    config = load_config(args, scenario={
        'family': args.family,
        'board_size': args.board_size,
        'background': args.background,
        'n_balls': args.balls,
        'experience_balls': args.experience_balls,
    })
    if dump_config(args, config):
        return
    if args.count < 0 or args.n < 0 or args.pred_frames < 1:
        parser.error("--count and --n must be non-negative, --pred-frames positive.")

    sc = config.scenario
    try:
        store = Store(args.out, create=True, force=args.force)
    except StoreInitializationError as e:
        print(e, file=sys.stderr)
        sys.exit("Use --force to overwrite.")

    progress(f"Generating {args.count} {sc.family} samples...")
    samples = generate(sc, args.count, args.n, args.pred_frames, args.seed, threads=args.threads)
    done()

    progress(f"Writing dataset to '{args.out}'...")
    with store:
        store.config = sc
        store.master_seed = args.seed
        for sample in samples:
            index = store.add(sample)
            if args.frames:
                store.write_frames(index, sc.palette)
    done()
    print(store.manifest_path)


def cmd_summarize(parser, args=None):
    """summarize runs into dynamic and median images

For every run j of sample i (run 0 is the prediction run) this writes
sample_{i}/run_{j}.f32, the raw 6 x H x W summary stack, plus
run_{j}_dynamic.ppm and run_{j}_median.ppm for viewing, and the
ground-truth obstacle mask as sample_{i}/mask.pgm.

    """
    if args is None:
        parser.add_argument(
            'dataset',
            help="dataset directory",
        )
        parser.add_argument(
            'out',
            help="output directory",
        )
        return

    if dump_config(args, load_config(args)):
        return
    store = open_store(args.dataset)
    palette = store.config.palette if store.config else DEFAULT_PALETTE
    prepare_outdir(args.out, args.force)

    def summarize(item):
        i, sample = item
        sdir = os.path.join(args.out, f'sample_{i}')
        os.makedirs(sdir, exist_ok=True)
        renderer = FrameRenderer(sample.scenario, palette)
        for j, run in enumerate(sample.runs):
            stack = summarize_run(renderer.run_frames(run))
            base = os.path.join(sdir, f'run_{j}')
            write(base + '.f32', encode_raw(stack))
            write(base + '_dynamic.ppm', encode_ppm(normalize_for_display(stack[DYNAMIC])))
            write(base + '_median.ppm', encode_ppm(stack[MEDIAN]))
        write(os.path.join(sdir, 'mask.pgm'), encode_pgm16(gt_obstacle_mask(sample.scenario)))

    progress(f"Summarizing {len(store)} samples...")
    pmap(summarize, list(enumerate(store)), args.threads)
    done()
    print(args.out)


def cmd_train_mask(parser, args=None):
    """train the obstacle mask regressor

The regressor maps each run summary to a mask; masks are max-pooled
over the first N experience runs of a sample and compared to the
ground-truth obstacle mask.  Writes model.ipck and loss.csv.

    """
    if args is None:
        parser.add_argument(
            'dataset',
            help="training dataset directory",
        )
        parser.add_argument(
            'out',
            help="output directory",
        )
        parser.add_argument(
            '--test', metavar='DATASET',
            help="held-out dataset whose loss is recorded every epoch",
        )
        add_train_args(parser)
        return

    config = load_config(args, train=train_overrides(args))
    if dump_config(args, config):
        return
    store = open_store(args.dataset)
    test = open_store(args.test).samples if args.test else None
    palette = store.config.palette if store.config else DEFAULT_PALETTE
    prepare_outdir(args.out, args.force)

    progress(f"Training on {len(store)} samples with N={args.n}...")
    result = train(store.samples, args.n, config.train, test=test, palette=palette)
    done()
    if result.retries:
        print(f"learning rate reduced to {result.learning_rate:g} after {result.retries} restarts",
              file=sys.stderr)

    model_path = os.path.join(args.out, 'model.ipck')
    result.model.save(model_path)
    write_loss_csv(os.path.join(args.out, 'loss.csv'), result.train_losses, result.test_losses)
    with open(os.path.join(args.out, 'config.json'), 'w') as f:
        f.write(config.dumps() + '\n')
    if result.train_losses:
        print(f"final train loss: {result.train_losses[-1]:.6f}")
    print(model_path)


def cmd_eval(parser, args=None):
    """evaluate baselines and trained masks

Scores the obstacle-free simulator baseline on the prediction runs at
each horizon (metrics.csv).  With --checkpoint, also scores the mask
regressor against the all-on baseline (mask_error.csv).

    """
    if args is None:
        parser.add_argument(
            'dataset',
            help="test dataset directory",
        )
        parser.add_argument(
            'out',
            help="output directory",
        )
        parser.add_argument(
            '--checkpoint', metavar='FILE',
            help="trained mask regressor",
        )
        parser.add_argument(
            '--horizons', type=parse_ints,
            default=list(DEFAULT_HORIZONS),
            help="comma separated horizons (default: 20,60,100)",
        )
        parser.add_argument(
            '--by-kind', action='store_true',
            help="add rows per obstacle kind encountered",
        )
        parser.add_argument(
            '--n', type=int, default=7, metavar='N',
            help="experience runs used for mask prediction (default: 7)",
        )
        parser.add_argument(
            '--ablate', choices=sorted(ABLATE), default='none',
            help="channel ablation used for mask prediction",
        )
        return

    config = load_config(args)
    if dump_config(args, config):
        return
    model = ConvRegressor.load(args.checkpoint) if args.checkpoint else None
    store = open_store(args.dataset)
    palette = store.config.palette if store.config else DEFAULT_PALETTE
    substeps = store.config.substeps if store.config else config.scenario.substeps
    prepare_outdir(args.out, args.force)

    progress(f"Evaluating baseline on {len(store)} samples...")
    report = evaluate_baseline(store.samples, args.horizons, palette, by_kind=args.by_kind,
                               substeps=substeps, threads=args.threads)
    done()
    report.write_csv(os.path.join(args.out, 'metrics.csv'))
    print(report.table())

    if model:
        progress(f"Evaluating mask regressor with N={args.n}...")
        mask = evaluate_mask_error(model, store.samples, args.n, ABLATE[args.ablate], palette)
        done()
        write_mask_csv(os.path.join(args.out, 'mask_error.csv'), [mask])
        print(f"mask error: {mask.mean:.5f} ± {mask.std:.5f} "
              f"(all-on baseline {mask.baseline_mean:.5f} ± {mask.baseline_std:.5f})")


def cmd_sweep(parser, args=None):
    """mask error versus experience count

Trains one regressor per value of --n-values on the training dataset
and scores each on the test dataset.  With --ablations, also trains
one regressor per channel ablation at N=--n.  Writes sweep.csv.

    """
    if args is None:
        parser.add_argument(
            'train',
            help="training dataset directory",
        )
        parser.add_argument(
            'test',
            help="test dataset directory",
        )
        parser.add_argument(
            'out',
            help="output directory",
        )
        parser.add_argument(
            '--n-values', type=parse_ints, default=[0, 1, 7],
            help="comma separated experience counts (default: 0,1,7)",
        )
        parser.add_argument(
            '--ablations', action='store_true',
            help="also run the channel ablations",
        )
        add_train_args(parser)
        return

    config = load_config(args, train=train_overrides(args))
    if dump_config(args, config):
        return
    train_store = open_store(args.train)
    test_store = open_store(args.test)
    palette = train_store.config.palette if train_store.config else DEFAULT_PALETTE
    prepare_outdir(args.out, args.force)

    progress(f"Sweeping N over {args.n_values}...")
    reports = experience_sweep(train_store.samples, test_store.samples, args.n_values,
                               config.train, palette)
    done()
    if args.ablations:
        progress(f"Sweeping ablations at N={args.n}...")
        reports += ablation_sweep(train_store.samples, test_store.samples, args.n,
                                  config.train, palette=palette)
        done()
    path = os.path.join(args.out, 'sweep.csv')
    write_mask_csv(path, reports)
    for r in reports:
        print(f"N={r.n_used:<3} {r.ablation:<13} {r.mean:.5f} ± {r.std:.5f}  "
              f"(all-on {r.baseline_mean:.5f})")
    print(path)


def cmd_help(parser, args=None):
    """intuiphys help

    """
    if args is None:
        parser.add_argument(
            'topic', metavar="'files'", nargs='?',
            help="describe the files written by each command",
        )
        return

    if args.topic == 'files':
        print("""
gen OUT         OUT/manifest.json holds the config, master seed and
                every sample (scenario geometry, trajectories, contact
                events) with CRC32 checksums.  With --frames, frame t
                of run j of sample i is OUT/sample_{i}/run_{j}/frame_{t}.ppm;
                run 0 is the prediction run.

summarize OUT   OUT/sample_{i}/run_{j}.f32 summary stacks (u32 C, H, W
                header, then little-endian float32 values), with
                _dynamic.ppm and _median.ppm previews and mask.pgm.

train-mask OUT  OUT/model.ipck checkpoint, OUT/loss.csv
                (epoch,train_loss,test_loss), OUT/config.json.

eval OUT        OUT/metrics.csv, one row per horizon (and kind with
                --by-kind); OUT/mask_error.csv with --checkpoint.

sweep OUT       OUT/sweep.csv, one row per experience count or ablation.
""".strip())

    else:
        parser.print_help()

##################################################


def get_func(cmd):
    return eval('cmd_{}'.format(cmd.replace('-', '_')))


parser = argparse.ArgumentParser(
    prog=PROG,
    description="""2.1D intuitive physics scenarios, experience summaries and mask learning""",
    epilog="""
Set LOG_LEVEL (e.g. DEBUG) for diagnostic logging, written to stderr or
to the file named by INTUIPHYS_LOG_FILE.  Extra scenario families are
loaded from ~/.intuiphys/families and INTUIPHYS_FAMILY_PATH.

See "intuiphys help files" for the output layout of each command.
""",
    formatter_class=argparse.RawDescriptionHelpFormatter,
)
parser.add_argument(
    '--version', '-v', action='version', version=__version__,
    help="show version number and exit",
)
parser.add_argument(
    '--config', metavar='FILE',
    help="JSON configuration file",
)
parser.add_argument(
    '--dump-config', action='store_true',
    help="print the effective configuration and exit",
)
parser.add_argument(
    '--threads', type=int, default=1,
    help="worker threads (does not affect results)",
)
parser.add_argument(
    '--force', action='store_true',
    help="overwrite a non-empty output directory",
)
subparsers = parser.add_subparsers(
    title="commands",
    dest='cmd',
    metavar='',
)


def gensubparse(cmd, *aliases, prefix_chars='-'):
    func = get_func(cmd)
    sp = subparsers.add_parser(
        cmd, aliases=aliases,
        help=func.__doc__.splitlines()[0].strip(),
        description=func.__doc__.strip(),
        formatter_class=argparse.RawDescriptionHelpFormatter,
        prefix_chars=prefix_chars,
    )
    func(sp)
    sp.set_defaults(func=func)


gensubparse('gen')
gensubparse('summarize')
gensubparse('train-mask')
gensubparse('eval')
gensubparse('sweep')
gensubparse('help')


def main(argv=None):
    args = parser.parse_args(argv)
    signal.signal(signal.SIGINT, signal.SIG_DFL)
    if hasattr(signal, 'SIGPIPE'):
        signal.signal(signal.SIGPIPE, signal.SIG_DFL)
    logging.basicConfig(
        level=LOG_LEVEL,
        filename=LOG_FILE,
        format='%(asctime)s %(name)s %(levelname)s: %(message)s',
    )
    log.debug(args)

    try:
        if args.cmd is None:
            if args.dump_config:
                print(load_config(args).dumps())
                return
            parser.error("a command is required")
        if args.threads < 1:
            parser.error("--threads must be at least 1")
        args.func(parser, args)
    except USER_ERRORS as e:
        sys.exit(str(e))
    except Exception as e:
        log.exception("internal error")
        print(f"{PROG}: internal error: {e!r}", file=sys.stderr)
        sys.exit(2)


if __name__ == '__main__':
    main()
