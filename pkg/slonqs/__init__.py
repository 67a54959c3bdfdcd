#    Sequential local optimization of neural network quantum states.
#
#    Copyright (C) 2024 The slonqs developers
#
#    This program is free software: you can redistribute it and/or modify
#    it under the terms of the GNU General Public License as published by
#    the Free Software Foundation, either version 3 of the License, or
#    (at your option) any later version.
#
#    This program is distributed in the hope that it will be useful,
#    but WITHOUT ANY WARRANTY; without even the implied warranty of
#    MERCHANTABILITY or FITNESS FOR A PARTICULAR PURPOSE.  See the
#    GNU General Public License for more details.

from .__version__ import __version__, __version_vector__

from .errors import *
from .model import *
from .ansatz import *
from .sampler import *
from .estimator import *
from .trace import *
from .optimizer import *
from .oracle import *
from .runner import *
from .presets import *

from . import presets
