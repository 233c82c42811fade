#pragma once

#include "sae/assembly.hpp"
#include "sae/boundary_basis.hpp"
#include "sae/boundary_conditions.hpp"
#include "sae/core.hpp"
#include "sae/eigensolver.hpp"
#include "sae/io.hpp"
#include "sae/mesh.hpp"
#include "sae/pipeline.hpp"
#include "sae/quadrature.hpp"
