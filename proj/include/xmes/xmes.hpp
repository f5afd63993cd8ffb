#pragma once

#include "xmes/copula.hpp"
#include "xmes/data_matrix.hpp"
#include "xmes/error.hpp"
#include "xmes/experiment.hpp"
#include "xmes/interval.hpp"
#include "xmes/marginal.hpp"
#include "xmes/mes.hpp"
#include "xmes/model.hpp"
#include "xmes/oracle.hpp"
#include "xmes/output.hpp"
#include "xmes/parallel.hpp"
#include "xmes/radial.hpp"
#include "xmes/returns.hpp"
#include "xmes/rng.hpp"
#include "xmes/serial.hpp"
#include "xmes/special.hpp"
#include "xmes/tail.hpp"
