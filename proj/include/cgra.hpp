/*
Copyright 2026 The cgra-layout-explorer Authors

Licensed under the Apache License, Version 2.0 (the "License");
you may not use this file except in compliance with the License.
You may obtain a copy of the License at

    http://www.apache.org/licenses/LICENSE-2.0

Unless required by applicable law or agreed to in writing, software
distributed under the License is distributed on an "AS IS" BASIS,
WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
See the License for the specific language governing permissions and
limitations under the License.
*/

#pragma once

#include "cgra/bb_search.hpp"
#include "cgra/cost.hpp"
#include "cgra/cost_model.hpp"
#include "cgra/dfg.hpp"
#include "cgra/error.hpp"
#include "cgra/heatmap.hpp"
#include "cgra/layout.hpp"
#include "cgra/mapper.hpp"
#include "cgra/mapping.hpp"
#include "cgra/op_group.hpp"
#include "cgra/post_opt.hpp"
#include "cgra/report_io.hpp"
