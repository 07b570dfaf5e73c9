#pragma once

#include "lyapcert/linalg.hpp"
#include "lyapcert/torus.hpp"
#include "lyapcert/potential.hpp"
#include "lyapcert/dynamics.hpp"
#include "lyapcert/cocycle.hpp"
#include "lyapcert/perturbation.hpp"
#include "lyapcert/certificate.hpp"
#include "lyapcert/estimator.hpp"
