#pragma once

#include "altdiff/errors.hpp"
#include "altdiff/bitword.hpp"
#include "altdiff/binmatrix.hpp"
#include "altdiff/altop.hpp"
#include "altdiff/difference_op.hpp"
#include "altdiff/rng.hpp"
#include "altdiff/parallel.hpp"
#include "altdiff/cipher.hpp"
#include "altdiff/linearity.hpp"
#include "altdiff/analysis.hpp"
#include "altdiff/report.hpp"
