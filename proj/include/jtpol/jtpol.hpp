#pragma once

#include "jtpol/core.hpp"
#include "jtpol/sparse_hermitian.hpp"
#include "jtpol/eigen_dense.hpp"
#include "jtpol/lanczos.hpp"
#include "jtpol/krylov.hpp"
#include "jtpol/molecule.hpp"
#include "jtpol/collective.hpp"
#include "jtpol/spectra.hpp"
#include "jtpol/dynamics.hpp"
#include "jtpol/reference.hpp"
#include "jtpol/config.hpp"
#include "jtpol/io.hpp"
#include "jtpol/validation.hpp"
#include "jtpol/app.hpp"
