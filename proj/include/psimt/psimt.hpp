#pragma once

#include "psimt/errors.hpp"
#include "psimt/field.hpp"
#include "psimt/mesh.hpp"
#include "psimt/operators.hpp"
#include "psimt/parallel.hpp"
#include "psimt/quaternion.hpp"
#include "psimt/reconstruction.hpp"
#include "psimt/structural_set.hpp"
#include "psimt/transforms.hpp"
#include "psimt/vec3.hpp"
