import logging

logger = logging.getLogger(__name__)

FORMAT_LOG = "%(asctime)s - %(levelname)-10s %(name)s.%(funcName)s : %(message)s"


class ColoredFormatter(logging.Formatter):
    """color console messages according to their level"""

    CRITICAL = "\x1b[31;1m"  # bold red
    ERROR = "\x1b[38;5;196m"  # red
    WARNING = "\x1b[38;5;226m"  # yellow
    INFO = "\033[36m"  # blue
    DEBUG = "\033[34m"  # lightblue
    reset = "\x1b[0m"

    def __init__(self, fmt=FORMAT_LOG):
        super().__init__()
        self.fmt = fmt
        self._formatters = {
            level: logging.Formatter(getattr(self, logging.getLevelName(level)) + fmt + self.reset)
            for level in (logging.DEBUG, logging.INFO, logging.WARNING, logging.ERROR, logging.CRITICAL)
        }
        self._fallback = logging.Formatter(fmt)

    def format(self, record):
        formatter = self._formatters.get(record.levelno, self._fallback)
        return formatter.format(record)


def create_logger(name="sampsmooth", level="DEBUG", filename=None):
    """build (or reconfigure) the package logger

    Calling it again only changes the level of the console handler, so the CLI can
    adjust verbosity after the library already logged something.

    Parameters
    ----------
    name : str, optional
        name of the logger, by default "sampsmooth"
    level : str or int, optional
        level of the console handler, by default "DEBUG"
    filename : str or None, optional
        if specified, also log everything at DEBUG level in this file

    Returns
    -------
    logging.Logger
        the configured logger
    """

    _logger = logging.getLogger(name)
    level_name = logging.getLevelName(level) if isinstance(level, int) else level

    if len(_logger.handlers) > 0:
        console = _logger.handlers[0]
        if console.level != logging.getLevelName(level_name):
            console.setLevel(level)
            _logger.info(f"changed logging level to {level_name}")
        return _logger

    console = logging.StreamHandler()
    console.setFormatter(ColoredFormatter(FORMAT_LOG))
    console.setLevel(level)
    _logger.addHandler(console)

    if filename is not None:
        filehandler = logging.FileHandler(filename)
        filehandler.setFormatter(logging.Formatter(FORMAT_LOG))
        filehandler.setLevel(logging.DEBUG)
        _logger.addHandler(filehandler)

    _logger.setLevel(logging.DEBUG)
    _logger.debug(f"logger '{name}' activated at level {level_name}")
    return _logger
