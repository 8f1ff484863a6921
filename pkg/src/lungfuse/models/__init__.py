from lungfuse.models.checkpoint import *
from lungfuse.models.evaluation import *
from lungfuse.models.labels import *
from lungfuse.models.selection import *
from lungfuse.models.volume import *
