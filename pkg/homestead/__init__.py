import logging
import sys

from lcogt_logging import LCOGTFormatter

from homestead.logs import HomesteadLogger

__version__ = '0.1.0'

logging.setLoggerClass(HomesteadLogger)
logging.captureWarnings(True)
logger = logging.getLogger('homestead')

handler = logging.StreamHandler(stream=sys.stdout)
handler.setFormatter(LCOGTFormatter())
logger.addHandler(handler)
