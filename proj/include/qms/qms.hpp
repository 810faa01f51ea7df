#pragma once

#include "qms/errors.hpp"
#include "qms/linalg.hpp"
#include "qms/core.hpp"
#include "qms/integrals.hpp"
#include "qms/geometry.hpp"
#include "qms/catalog.hpp"
#include "qms/parallel.hpp"
#include "qms/poisson.hpp"
#include "qms/dynamics.hpp"
