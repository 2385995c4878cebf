import functools
import os
import sys

from absl import logging
from tensorboardX import SummaryWriter

from dmkde.args import FLAGS
from dmkde.errors import DmkdeError


def session_dir():
    """Creates <logdir>/<name> and stores the resolved flags in flagfile.txt."""
    logdir = os.path.join(FLAGS.logdir, FLAGS.name)
    os.makedirs(logdir, exist_ok=True)
    flagfile = os.path.join(logdir, 'flagfile.txt')
    if os.path.exists(flagfile):
        os.remove(flagfile)
    FLAGS.append_flags_into_file(flagfile)
    return logdir


def summary_writer(logdir):
    writer = SummaryWriter(logdir)
    writer.add_text('flagfile', FLAGS.flags_into_string().replace('\n', '\n\n'))
    return writer


def command(fn):
    """Turns fn(logdir) into an absl main; library errors exit with status 1."""
    @functools.wraps(fn)
    def main(argv):
        del argv
        try:
            fn(session_dir())
        except DmkdeError as e:
            logging.error('%s failed: %s', fn.__module__, e)
            sys.exit(1)
    return main
