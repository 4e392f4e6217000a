#pragma once

#include <biaslens/analysis.hpp>
#include <biaslens/corpus.hpp>
#include <biaslens/error.hpp>
#include <biaslens/eval.hpp>
#include <biaslens/lexicon.hpp>
#include <biaslens/model.hpp>
#include <biaslens/prediction.hpp>
#include <biaslens/report.hpp>
#include <biaslens/text.hpp>
