from __future__ import annotations

import functools
import logging
from datetime import datetime
from pathlib import Path
from sys import exit, stderr, stdout
from typing import Callable

import click
from pydantic import ValidationError

from ._click_opt_groups import GroupCmd, GroupOpt
from ._logging_utils import TermEscapeCodeFormatter, initialize_snnlog_screen, snnlog_screen
from .config import CFG, DEFAULT_CONFIG, apply_overrides, load_config
from .exceptions import SpikeLSTMError
from .operations import op_queue, op_queue_context

logging.basicConfig(level=logging.INFO)
initialize_snnlog_screen()

logger = logging.getLogger(__name__)

try:
    import coverage
    coverage.process_startup()
except ImportError:
    pass

OVERRIDES = ('seed', 'iterations', 'checkpoint', 'metrics', 'alpha1', 'alpha2')


def config_option(f):
    return click.option('-c',
                        '--config',
                        default=DEFAULT_CONFIG,
                        help=f'Path to config (default={DEFAULT_CONFIG}).',
                        cls=GroupOpt,
                        group='Common options')(f)


def quiet_option(f):
    return click.option('-q',
                        '--quiet',
                        is_flag=True,
                        default=False,
                        help='Don\'t output anything to the screen'
                        ' (except mandatory prompts).',
                        cls=GroupOpt,
                        group='Common options')(f)


def debug_option(f):
    """Must be added together with `logfile_option`."""
    return click.option('--debug',
                        is_flag=True,
                        help='Enable debug print statements.',
                        cls=GroupOpt,
                        group='Common options')(f)


def dry_run_option(f):
    return click.option('--dry-run',
                        is_flag=True,
                        help='Execute without any side-effects.',
                        cls=GroupOpt,
                        group='Common options')(f)


def yes_option(f):
    return click.option('--yes',
                        is_flag=True,
                        help='Answer yes to questions automatically.',
                        cls=GroupOpt,
                        group='Common options')(f)


def logfile_option(f):
    """Must be added together with `debug_option`."""
    return click.option('--logfile',
                        '-l',
                        is_flag=False,
                        default='spikelstm.log',
                        help='where to send the logfile,'
                        ' the special values stderr/stdout'
                        ' will send it there respectively.',
                        cls=GroupOpt,
                        group='Common options')(f)


logging_options = (logfile_option, debug_option)
all_options = (*logging_options, config_option, quiet_option, dry_run_option, yes_option)


def seed_option(f):
    return click.option('--seed',
                        type=click.IntRange(0, 2**64 - 1),
                        help='Override `training.seed`.',
                        cls=GroupOpt,
                        group='Overrides')(f)


def iterations_option(f):
    return click.option('--iterations',
                        type=click.IntRange(min=0),
                        help='Override `training.iterations`.',
                        cls=GroupOpt,
                        group='Overrides')(f)


def checkpoint_option(f):
    return click.option('--checkpoint',
                        type=Path,
                        help='Override `outputs.checkpoint`.',
                        cls=GroupOpt,
                        group='Overrides')(f)


def metrics_option(f):
    return click.option('--metrics',
                        type=Path,
                        help='Override `outputs.metrics`.',
                        cls=GroupOpt,
                        group='Overrides')(f)


def alpha_options(f):
    for name in ('alpha2', 'alpha1'):
        f = click.option(f'--{name}',
                         type=float,
                         help=f'Override `surrogate.{name}`.',
                         cls=GroupOpt,
                         group='Overrides')(f)
    return f


class OptionParser:

    def wrap(self, func: Callable):
        """With this wrapper it becomes possible to parse common options in
        user defined order."""

        def callback(**kwargs):
            for parse in (
                    self.parse_config,
                    self.parse_logfile,
                    self.parse_yes,
                    self.parse_dry_run,
                    self.parse_quiet,
            ):
                try:
                    parse(**kwargs)
                except TypeError:
                    # Skip when option has not been set
                    pass
            try:
                func(**kwargs)
            except SpikeLSTMError as e:
                logger.error('%s: %s', e.__class__.__name__, e)
                click.echo(f'Error: {e}', err=True)
                exit(e.exit_code)

        return callback

    def parse_logfile(self, *, logfile, debug, **kwargs):
        level = logging.DEBUG if debug else logging.INFO

        streams = {'stdout': stdout, 'stderr': stderr}
        logging.getLogger().handlers = []

        if logfile in streams.keys():
            logging.basicConfig(stream=streams[logfile], level=level)
        else:
            fhandler = logging.FileHandler(logfile)
            fhandler.setLevel(level)

            # Remove fancies from logfiles
            escaped_format = TermEscapeCodeFormatter(logging.BASIC_FORMAT)
            fhandler.setFormatter(escaped_format)
            logging.getLogger().addHandler(fhandler)
            logging.getLogger().setLevel(level)

        start_time = datetime.now().astimezone().strftime('%Y-%m-%d %H:%M:%S %z')
        logger.info('')
        logger.info(f'spikelstm starting at {start_time}')
        logger.info('------------------------------------------------')
        logger.info('')

    def parse_quiet(self, *, quiet, **kwargs):
        if quiet:
            snnlog_screen.handlers = []  # remove output methods
            CFG.quiet = True

    def parse_dry_run(self, *, dry_run, **kwargs):
        op_queue.dry_run = dry_run

    def parse_config(self, *, config, **kwargs):
        try:
            load_config(config)
        except ValidationError as e:
            exit(e)
        except FileNotFoundError as e:
            exit(e)

    def parse_yes(self, *, yes, **kwargs):
        op_queue.yes = yes


def common_options(*options):
    """common_options.

    IMPORTANT: This must be the last click option specified before
    the execution of the actual function, otherwise options will be
    missing
    """

    def decorator(func):
        wrapper = OptionParser().wrap(func)

        for option in options:
            wrapper = option(wrapper)

        functools.update_wrapper(wrapper, func)

        return wrapper

    return decorator


def _config_with_overrides(kwargs: dict):
    """Pop the override flags from `kwargs` and apply them to `CFG`."""
    overrides = {key: kwargs.pop(key, None) for key in OVERRIDES}
    try:
        return apply_overrides(CFG, **overrides)
    except ValidationError as e:
        exit(e)


def cli_entry(**kwargs):
    cli()


@click.group()
def cli(**kwargs):
    """Train and evaluate LSTM spiking neural networks.

    Start with `spikelstm init --task toy`, then `spikelstm train`.
    """
    pass


@cli.command('init', cls=GroupCmd)
@click.option('-t',
              '--task',
              type=click.Choice(['toy', 'smnist', 'semnist', 'char-lm', 'word-lm', 'speech']),
              default='toy',
              help='Bundled experiment to start from.')
@click.option('-o',
              '--out',
              'out_file',
              help=f'Path to write config to (default={DEFAULT_CONFIG}).',
              default=DEFAULT_CONFIG)
@click.option('--force', is_flag=True, help='Overwrite existing config.')
@common_options(*logging_options, quiet_option, dry_run_option, yes_option)
def cli_init(**kwargs):
    """Create a config file for one of the bundled experiments."""
    from .init import init
    with op_queue_context():
        init(**kwargs)


@cli.command('train', cls=GroupCmd)
@seed_option
@iterations_option
@checkpoint_option
@metrics_option
@alpha_options
@click.option('--repeats',
              type=click.IntRange(min=1),
              default=1,
              help='Train this many models with consecutive seeds and report mean ± std.')
@common_options(*logging_options, config_option, quiet_option)
def cli_train(**kwargs):
    """Train a network and write the checkpoint and metrics file.

    \b
    Example:

    - `spikelstm train --seed 1 --iterations 500`
    """
    from .train import train
    cfg = _config_with_overrides(kwargs)
    train(cfg=cfg, **kwargs)


@cli.command('eval', cls=GroupCmd)
@checkpoint_option
@common_options(*logging_options, config_option, quiet_option)
def cli_eval(**kwargs):
    """Report accuracy, perplexity or correlation of a checkpoint on held-
    out data."""
    from .evaluate import evaluate
    cfg = _config_with_overrides(kwargs)
    evaluate(cfg=cfg, checkpoint=cfg.outputs.checkpoint, **kwargs)


@cli.command('generate', cls=GroupCmd)
@checkpoint_option
@seed_option
@click.option('-s', '--seed-text', 'seed_text', required=True, help='Text to continue.')
@click.option('-n',
              '--length',
              type=click.IntRange(min=0),
              default=200,
              help='Number of symbols to generate.')
@click.option('--temperature',
              type=click.FloatRange(min=0),
              default=1.0,
              help='Sampling temperature, 0 for greedy decoding.')
@common_options(*logging_options, config_option, quiet_option)
def cli_generate(**kwargs):
    """Continue a text with a trained language model.

    The config is needed to rebuild the vocabulary of the checkpoint.
    """
    from .generate import generate_text
    cfg = _config_with_overrides(kwargs)
    generate_text(cfg=cfg, checkpoint=cfg.outputs.checkpoint, **kwargs)


@cli.command('sweep-alpha', cls=GroupCmd)
@seed_option
@iterations_option
@click.option('--alpha1',
              'alpha1_values',
              type=float,
              multiple=True,
              help='Value of alpha1, can be given multiple times (default: `sweep.alpha1`).')
@click.option('--alpha2',
              'alpha2_values',
              type=float,
              multiple=True,
              help='Value of alpha2, can be given multiple times (default: `sweep.alpha2`).')
@common_options(*logging_options, config_option, quiet_option)
def cli_sweep_alpha(alpha1_values, alpha2_values, **kwargs):
    """Train one model per (alpha1, alpha2) pair and write the loss
    curves."""
    from .sweep import sweep_alpha
    cfg = _config_with_overrides(kwargs)
    sweep_alpha(cfg=cfg, alpha1=alpha1_values, alpha2=alpha2_values, **kwargs)


@cli.command('gradcheck', cls=GroupCmd)
@click.option('--trials', type=click.IntRange(min=0), default=20, help='Number of instances.')
@click.option('--seed', type=click.IntRange(0, 2**64 - 1), default=0, help='Seed.')
@click.option('--max-input', type=click.IntRange(min=1), default=4, help='Largest input size.')
@click.option('--max-hidden',
              type=click.IntRange(min=1),
              default=6,
              help='Largest hidden size.')
@click.option('--max-steps',
              type=click.IntRange(min=1),
              default=5,
              help='Longest sequence.')
@click.option('--tolerance',
              type=float,
              default=1e-10,
              help='Largest accepted relative error.')
@click.option('--corrupt', hidden=True, default=None)
@common_options(*logging_options, quiet_option)
def cli_gradcheck(**kwargs):
    """Compare the hand-written gradients with the reference engine on
    small random networks."""
    from .gradcheck import gradcheck
    gradcheck(**kwargs)


@cli.command('encode-preview', cls=GroupCmd)
@click.option('-o', '--output', type=Path, default=None, help='Also write the raster as CSV.')
@common_options(*all_options)
def cli_encode_preview(**kwargs):
    """Print the spike encoding of the first training sample (features x
    time steps)."""
    from .preview import encode_preview
    with op_queue_context():
        encode_preview(cfg=CFG, **kwargs)


@cli.command('clean', cls=GroupCmd)
@click.option('--embeddings', is_flag=True, help='Also remove the word embeddings.')
@common_options(*all_options)
def cli_clean(**kwargs):
    """Remove the checkpoint, metrics and embeddings files of the config."""
    from .cleanup import cleanup
    with op_queue_context():
        cleanup(cfg=CFG, **kwargs)


@cli.command('version')
def cli_version(**kwargs):
    """Print the version and exit."""
    import git

    from spikelstm import __version__

    string = f'spikelstm {__version__}'

    try:
        repo = git.Repo(Path(__file__), search_parent_directories=True)
        sha = repo.head.object.hexsha
    except BaseException:
        sha = '???'

    string += f' (rev: {sha})'

    click.echo(string)


if __name__ == '__main__':
    cli()
