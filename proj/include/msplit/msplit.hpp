#pragma once

#include "msplit/core.hpp"
#include "msplit/csv_io.hpp"
#include "msplit/linalg3.hpp"
#include "msplit/flux_check.hpp"
#include "msplit/operators.hpp"
#include "msplit/scenarios.hpp"
#include "msplit/splitting.hpp"
#include "msplit/stefan_maxwell.hpp"
