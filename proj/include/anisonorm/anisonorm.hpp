#pragma once

#include "anisonorm/anisotropy.hpp"
#include "anisonorm/dense_analysis.hpp"
#include "anisonorm/errors.hpp"
#include "anisonorm/gramians.hpp"
#include "anisonorm/linalg.hpp"
#include "anisonorm/riccati_anbrl.hpp"
#include "anisonorm/system_file.hpp"
#include "anisonorm/system_model.hpp"
