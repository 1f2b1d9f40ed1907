#pragma once

#include <spblas/errors.hpp>
#include <spblas/formats.hpp>
#include <spblas/handle.hpp>
#include <spblas/kernels.hpp>
#include <spblas/multistage.hpp>
#include <spblas/runtime.hpp>
#include <spblas/state.hpp>
#include <spblas/validate.hpp>
