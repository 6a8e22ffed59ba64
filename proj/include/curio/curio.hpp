#pragma once

#include "curio/trace_model.hpp"
#include "curio/trace_io.hpp"
#include "curio/scenario.hpp"
#include "curio/kalman.hpp"
#include "curio/tracker.hpp"
#include "curio/body_budget.hpp"
#include "curio/knowledge.hpp"
#include "curio/curiosity.hpp"
#include "curio/report.hpp"
#include "curio/plot.hpp"
#include "curio/config.hpp"
