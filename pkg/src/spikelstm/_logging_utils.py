from __future__ import annotations

import logging

import click


class TermEscapeCodeFormatter(logging.Formatter):
    """Strip click styling from records written to log files."""

    def format(self, record):
        record.msg = click.unstyle(str(record.msg))
        return super().format(record)


# Logger for user-facing output (also ends up in the log)
snnlog_screen = logging.getLogger('spikelstm.screen')


def initialize_snnlog_screen():
    if snnlog_screen.handlers:
        return
    stream = logging.StreamHandler()
    stream.setFormatter(logging.Formatter('%(message)s'))
    snnlog_screen.addHandler(stream)
