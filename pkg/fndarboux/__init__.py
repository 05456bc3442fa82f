from .darboux_exceptions import *
from .expr import *
from .params import *
from .field import *
from .graded import *
from .darboux import *
from .numeric import *
from .calculus import *
