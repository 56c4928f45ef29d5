#pragma once

#include "skintone/builtin.hpp"
#include "skintone/color.hpp"
#include "skintone/config.hpp"
#include "skintone/error.hpp"
#include "skintone/face.hpp"
#include "skintone/fixtures.hpp"
#include "skintone/geometry.hpp"
#include "skintone/hash.hpp"
#include "skintone/image.hpp"
#include "skintone/image_io.hpp"
#include "skintone/mask.hpp"
#include "skintone/normalize.hpp"
#include "skintone/pipeline.hpp"
#include "skintone/record.hpp"
#include "skintone/report.hpp"
#include "skintone/scales.hpp"
#include "skintone/stats.hpp"
#include "skintone/summary.hpp"
#include "skintone/tone.hpp"
