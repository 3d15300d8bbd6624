#pragma once

#include "permod/athlete.hpp"
#include "permod/datasets.hpp"
#include "permod/error.hpp"
#include "permod/fitting.hpp"
#include "permod/hydraulic.hpp"
#include "permod/json_io.hpp"
#include "permod/protocol.hpp"
#include "permod/report.hpp"
#include "permod/stats.hpp"
#include "permod/wbal.hpp"
