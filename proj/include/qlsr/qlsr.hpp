#ifndef QLSR_QLSR_HPP
#define QLSR_QLSR_HPP

#include "qlsr/errors.hpp"
#include "qlsr/io.hpp"
#include "qlsr/matcore.hpp"
#include "qlsr/oscillator_params.hpp"
#include "qlsr/passive_analysis.hpp"
#include "qlsr/struct_analysis.hpp"
#include "qlsr/synthesis.hpp"
#include "qlsr/sysmodel.hpp"
#include "qlsr/tolerances.hpp"
#include "qlsr/transfer.hpp"

#endif  // QLSR_QLSR_HPP
