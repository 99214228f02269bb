#pragma once

#include <divprio/apfd.hpp>
#include <divprio/common.hpp>
#include <divprio/compressor.hpp>
#include <divprio/corpus.hpp>
#include <divprio/evaluation.hpp>
#include <divprio/lsh.hpp>
#include <divprio/matrix_io.hpp>
#include <divprio/metrics.hpp>
#include <divprio/order_io.hpp>
#include <divprio/prioritizer.hpp>
#include <divprio/stats.hpp>
#include <divprio/synthetic.hpp>
