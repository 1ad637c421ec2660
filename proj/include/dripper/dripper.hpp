#pragma once

// Everything except the command-line front end (dripper/cli.hpp), which
// pulls in CLI11.

#include "dripper/benchmark.hpp"
#include "dripper/classifier.hpp"
#include "dripper/complexity.hpp"
#include "dripper/cost.hpp"
#include "dripper/decoder.hpp"
#include "dripper/dom.hpp"
#include "dripper/encoding.hpp"
#include "dripper/error.hpp"
#include "dripper/evaluate.hpp"
#include "dripper/fsm.hpp"
#include "dripper/html_parser.hpp"
#include "dripper/labels.hpp"
#include "dripper/markdown.hpp"
#include "dripper/pipeline.hpp"
#include "dripper/postprocess.hpp"
#include "dripper/preprocess.hpp"
#include "dripper/prompt.hpp"
#include "dripper/remote.hpp"
#include "dripper/rouge.hpp"
#include "dripper/subprocess.hpp"
#include "dripper/tokenizer.hpp"
