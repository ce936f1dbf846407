#pragma once

#include "equicomp/befit.hpp"
#include "equicomp/bigcount.hpp"
#include "equicomp/ensemble.hpp"
#include "equicomp/errors.hpp"
#include "equicomp/harness.hpp"
#include "equicomp/parallel.hpp"
#include "equicomp/partition.hpp"
#include "equicomp/rational.hpp"
#include "equicomp/report.hpp"
#include "equicomp/rootfind.hpp"
#include "equicomp/spectrum.hpp"
