#pragma once

#include "qzdefl/core.hpp"
#include "qzdefl/pencil.hpp"
#include "qzdefl/reduction.hpp"
#include "qzdefl/deflation.hpp"
#include "qzdefl/solver.hpp"
#include "qzdefl/pencilgen.hpp"
#include "qzdefl/analysis.hpp"
#include "qzdefl/io.hpp"
#include "qzdefl/experiment.hpp"
