/* Copyright 2026 The fovtok Authors. All Rights Reserved.

Licensed under the Apache License, Version 2.0 (the "License");
you may not use this file except in compliance with the License.
You may obtain a copy of the License at

    http://www.apache.org/licenses/LICENSE-2.0

Unless required by applicable law or agreed to in writing, software
distributed under the License is distributed on an "AS IS" BASIS,
WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
See the License for the specific language governing permissions and
limitations under the License.
==============================================================================*/

// Convenience header pulling in the whole library.

#ifndef FOVTOK_FOVTOK_HPP
#define FOVTOK_FOVTOK_HPP

#include "fovtok/autodiff.hpp"
#include "fovtok/costmodel.hpp"
#include "fovtok/error.hpp"
#include "fovtok/evaluation.hpp"
#include "fovtok/image.hpp"
#include "fovtok/integral_image.hpp"
#include "fovtok/losses.hpp"
#include "fovtok/nano/checkpoint.hpp"
#include "fovtok/nano/checks.hpp"
#include "fovtok/nano/mae.hpp"
#include "fovtok/nano/model.hpp"
#include "fovtok/nano/params.hpp"
#include "fovtok/nano/tensor.hpp"
#include "fovtok/nano/train.hpp"
#include "fovtok/pattern.hpp"
#include "fovtok/prompt.hpp"
#include "fovtok/reproject.hpp"
#include "fovtok/token_io.hpp"
#include "fovtok/tokenizer.hpp"

#endif  // FOVTOK_FOVTOK_HPP
