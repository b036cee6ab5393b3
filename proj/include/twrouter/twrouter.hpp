#ifndef TWROUTER_TWROUTER_HPP_
#define TWROUTER_TWROUTER_HPP_

#include "assignment.hpp"
#include "bench.hpp"
#include "cqm_model.hpp"
#include "instance.hpp"
#include "rng.hpp"
#include "schedule.hpp"
#include "sequencer.hpp"
#include "solution_io.hpp"
#include "solver.hpp"
#include "violation.hpp"

#endif
