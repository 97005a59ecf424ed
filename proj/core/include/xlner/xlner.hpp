#pragma once

#include "xlner/aligner.hpp"
#include "xlner/bio.hpp"
#include "xlner/corpus_io.hpp"
#include "xlner/error.hpp"
#include "xlner/metrics.hpp"
#include "xlner/projection.hpp"
#include "xlner/types.hpp"
