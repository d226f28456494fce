#pragma once

#include "pqlab/params.hpp"
#include "pqlab/geometry.hpp"
#include "pqlab/operator.hpp"
#include "pqlab/sampling.hpp"
#include "pqlab/barriers.hpp"
#include "pqlab/verifier.hpp"
#include "pqlab/solver.hpp"
#include "pqlab/perron.hpp"
#include "pqlab/io.hpp"
#include "pqlab/toml.hpp"
#include "pqlab/experiments.hpp"
#include "pqlab/lab.hpp"
