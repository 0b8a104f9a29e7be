// Copyright 2026 The sentiknow Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef SENTIKNOW_ERRORS_H_
#define SENTIKNOW_ERRORS_H_

#include <cstddef>
#include <stdexcept>
#include <string>

namespace sentiknow {

// Base of every error the library throws. The CLI maps these to exit code 2.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Malformed line in a line-oriented input (lexicon, vectors, tagged text,
// similarity table, config, vocabulary).
class ParseError : public Error {
 public:
  ParseError(std::size_t line_number, std::string reason)
      : Error("line " + std::to_string(line_number) + ": " + reason),
        line_number_(line_number),
        reason_(std::move(reason)) {}

  std::size_t line_number() const { return line_number_; }
  const std::string& reason() const { return reason_; }

 private:
  std::size_t line_number_;
  std::string reason_;
};

class LengthMismatch : public Error {
 public:
  LengthMismatch(std::size_t lhs, std::size_t rhs)
      : Error("length mismatch: " + std::to_string(lhs) + " vs " +
              std::to_string(rhs)) {}
};

class MissingSimilarity : public Error {
 public:
  MissingSimilarity(std::string context_key, std::string gloss_key)
      : Error("no precomputed similarity for (" + context_key + ", " +
              gloss_key + ")"),
        context_key_(std::move(context_key)),
        gloss_key_(std::move(gloss_key)) {}

  const std::string& context_key() const { return context_key_; }
  const std::string& gloss_key() const { return gloss_key_; }

 private:
  std::string context_key_;
  std::string gloss_key_;
};

class TagCountMismatch : public Error {
 public:
  TagCountMismatch(std::size_t tokens, std::size_t tags)
      : Error("tag count mismatch: " + std::to_string(tokens) + " tokens, " +
              std::to_string(tags) + " tags") {}
};

class EmptySenses : public Error {
 public:
  EmptySenses() : Error("sense attention over an empty sense list") {}
};

class EmptyCorpus : public Error {
 public:
  EmptyCorpus() : Error("corpus contains no tokens") {}
};

class SchemaError : public Error {
 public:
  SchemaError(std::size_t line, std::string field)
      : Error("line " + std::to_string(line) + ": bad or missing field '" +
              field + "'"),
        line_(line),
        field_(std::move(field)) {}

  std::size_t line() const { return line_; }
  const std::string& field() const { return field_; }

 private:
  std::size_t line_;
  std::string field_;
};

class InvalidConfig : public Error {
 public:
  using Error::Error;
};

// Unknown or malformed key in a run configuration.
class ConfigError : public Error {
 public:
  ConfigError(std::string key, const std::string& reason)
      : Error("config key '" + key + "': " + reason), key_(std::move(key)) {}

  const std::string& key() const { return key_; }

 private:
  std::string key_;
};

class ShapeError : public Error {
 public:
  using Error::Error;
};

class NoMaskedPositions : public Error {
 public:
  NoMaskedPositions() : Error("loss needs at least one masked position") {}
};

class MissingLabel : public Error {
 public:
  MissingLabel() : Error("sequence has no sentence-level label") {}
};

class FormatError : public Error {
 public:
  FormatError(std::size_t line, const std::string& reason)
      : Error("line " + std::to_string(line) + ": " + reason), line_(line) {}

  std::size_t line() const { return line_; }

 private:
  std::size_t line_;
};

class EmptyDataset : public Error {
 public:
  EmptyDataset() : Error("evaluation dataset is empty") {}
};

class InvalidSpec : public Error {
 public:
  using Error::Error;
};

class IoError : public Error {
 public:
  using Error::Error;
};

}  // namespace sentiknow

#endif  // SENTIKNOW_ERRORS_H_
