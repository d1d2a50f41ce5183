// Copyright 2026 The Scry Toolchain Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <algorithm>
#include <cstdint>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "scry/alu.hpp"
#include "scry/encoding.hpp"
#include "scry/instruction.hpp"
#include "scry/types.hpp"

namespace scry {

enum class TrapCause : uint8_t {
  software,         // trap instruction
  nar_store,        // NaR reached st/sts
  nar_control,      // NaR reached jmp/call
  bad_address,      // store out of range, misaligned call target
  missing_operand,  // st/sts/jmp/call without its required input
  machine_check,    // two transfers fired on the same step
  bad_fetch,        // execution left the program
  stack_fault,      // rsrv past the stack region or free below zero
};

constexpr std::string_view to_string(TrapCause cause) {
  switch (cause) {
    case TrapCause::software: return "software";
    case TrapCause::nar_store: return "nar-store";
    case TrapCause::nar_control: return "nar-control";
    case TrapCause::bad_address: return "bad-address";
    case TrapCause::missing_operand: return "missing-operand";
    case TrapCause::machine_check: return "machine-check";
    case TrapCause::bad_fetch: return "bad-fetch";
    case TrapCause::stack_fault: return "stack-fault";
  }
  return "unknown";
}

/// A value travelling to its consumer. `remaining` counts the instructions
/// that must still execute in the owning activation before delivery; it is
/// frozen while the activation is suspended by a call.
struct InFlightOperand {
  TaggedValue value;
  uint32_t remaining = 0;
  uint64_t seq = 0;  // production order, machine-wide
};

/// An armed control transfer. The transfer fires in place of advancing to
/// the next instruction once `countdown` more instructions have executed.
struct PendingTransfer {
  enum class Kind : uint8_t { jump, call, ret };
  Kind kind = Kind::jump;
  int64_t target = 0;  // instruction index; unused for ret
  uint32_t countdown = 0;
};

struct RunConfig {
  unsigned xlen_bits = 64;  // 16, 32 or 64
  uint64_t memory_size = uint64_t{1} << 20;
  uint64_t program_base = 0;  // byte address of instruction 0
  std::optional<uint64_t> stack_base;  // one past the stack top; default: memory_size
  std::optional<uint64_t> stack_size;  // default: min(64 KiB, memory_size)
  uint32_t entry = 0;
  uint64_t step_budget = 1'000'000;
};

struct Outcome {
  enum class Kind : uint8_t { running, returned, trapped, timeout };
  Kind kind = Kind::running;
  std::vector<TaggedValue> values;  // engaged when returned
  TrapCause cause = TrapCause::software;
  uint64_t steps = 0;
};

/// Every operand ever produced ends up in exactly one bucket; tests check
/// produced == consumed + capacity_dropped + arity_dropped +
/// discarded_at_return + returned + alive at halt.
struct OperandStats {
  uint64_t produced = 0;
  uint64_t consumed = 0;
  uint64_t capacity_dropped = 0;    // beyond the 4-operand delivery limit
  uint64_t arity_dropped = 0;       // delivered past the instruction's arity
  uint64_t discarded_at_return = 0; // callee leftovers at ret
  uint64_t returned = 0;
};

class Machine {
 public:
  Machine(std::vector<Word> words, RunConfig config = {})
      : config_(config), words_(std::move(words)) {
    program_.reserve(words_.size());
    for (size_t i = 0; i < words_.size(); ++i) {
      auto ins = decode(words_[i]);
      if (!ins) {
        throw std::invalid_argument("word " + std::to_string(i) +
                                    " does not decode");
      }
      program_.push_back(*ins);
    }
    init();
  }

  Machine(const std::vector<Instruction>& program, RunConfig config = {})
      : config_(config), program_(program) {
    words_.reserve(program_.size());
    for (const Instruction& ins : program_) words_.push_back(encode(ins));
    init();
  }

  /// Queues an argument for the entry instruction. Only valid before the
  /// first step; arguments deliver in the order they were seeded.
  void seed_argument(TaggedValue v) {
    if (steps_ != 0 || outcome_.kind != Outcome::Kind::running) {
      throw std::logic_error("arguments must be seeded before running");
    }
    pool_.push_back({v, 0, seq_++});
    ++stats_.produced;
  }

  void set_trace(std::string* sink) { trace_ = sink; }

  /// Executes one instruction (all phases). Returns false once halted.
  bool step() {
    if (outcome_.kind != Outcome::Kind::running) return false;
    if (steps_ >= config_.step_budget) {
      outcome_.kind = Outcome::Kind::timeout;
      outcome_.steps = steps_;
      return false;
    }
    if (next_index_ < 0 ||
        next_index_ >= static_cast<int64_t>(program_.size())) {
      halt_trap(TrapCause::bad_fetch);
      return false;
    }

    const auto index = static_cast<uint32_t>(next_index_);
    const Instruction& ins = program_[index];
    current_index_ = index;
    notes_.clear();
    out_text_.clear();
    produced_.clear();
    trap_.reset();

    // Phase 1: deliver operands whose countdown has expired, oldest
    // production first, at most four.
    deliver();

    // Phase 2: execute.
    execute(ins);
    ++steps_;

    if (trap_) {
      finish_step_trace(ins);
      outcome_.kind = Outcome::Kind::trapped;
      outcome_.cause = *trap_;
      outcome_.steps = steps_;
      return false;
    }

    // Phase 3: this instruction's execution advances every other operand
    // in the current activation by one; its own outputs join afterwards.
    for (InFlightOperand& op : pool_) --op.remaining;
    pool_.insert(pool_.end(), produced_.begin(), produced_.end());

    // Phase 4: transfers count this instruction too, including one armed
    // by it (a zero trigger fires immediately after its arming step).
    size_t firing = transfers_.size();
    unsigned fire_count = 0;
    for (size_t i = 0; i < transfers_.size(); ++i) {
      if (transfers_[i].countdown == 0) {
        firing = i;
        ++fire_count;
      } else {
        --transfers_[i].countdown;
      }
    }
    if (fire_count > 1) {
      halt_trap(TrapCause::machine_check);
      finish_step_trace(ins);
      outcome_.kind = Outcome::Kind::trapped;
      outcome_.cause = TrapCause::machine_check;
      outcome_.steps = steps_;
      return false;
    }
    int64_t next = static_cast<int64_t>(index) + 1;
    bool halted = false;
    if (fire_count == 1) {
      next = fire(transfers_[firing], index, halted);
    }
    finish_step_trace(ins);
    if (halted) {
      outcome_.steps = steps_;
      return false;
    }
    next_index_ = next;
    return true;
  }

  Outcome run() {
    while (step()) {
    }
    if (trace_ && !halt_traced_) {
      halt_traced_ = true;
      *trace_ += halt_line();
    }
    return outcome_;
  }

  // Introspection.
  const Outcome& outcome() const { return outcome_; }
  uint64_t steps() const { return steps_; }
  int64_t next_index() const { return next_index_; }
  const std::vector<InFlightOperand>& pool() const { return pool_; }
  const std::vector<TaggedValue>& last_delivered() const { return delivered_; }
  const OperandStats& stats() const { return stats_; }
  size_t frame_depth() const { return frames_.size(); }
  uint64_t frame_base() const { return frame_base_; }
  uint64_t frame_size() const { return frame_size_; }

  /// Operands still in flight anywhere (current pool plus suspended frames).
  uint64_t alive_operands() const {
    uint64_t n = pool_.size();
    for (const Frame& f : frames_) n += f.pool.size();
    return n;
  }

  std::span<const uint8_t> memory() const { return memory_; }

  void poke(uint64_t addr, std::span<const uint8_t> bytes) {
    if (addr > memory_.size() || bytes.size() > memory_.size() - addr) {
      throw std::out_of_range("poke outside memory");
    }
    std::copy(bytes.begin(), bytes.end(), memory_.begin() + addr);
  }

  std::vector<uint8_t> peek(uint64_t addr, size_t n) const {
    if (addr > memory_.size() || n > memory_.size() - addr) {
      throw std::out_of_range("peek outside memory");
    }
    return {memory_.begin() + addr, memory_.begin() + addr + n};
  }

  TypeTag address_tag() const {
    switch (config_.xlen_bits) {
      case 16: return u16;
      case 32: return u32;
      default: return u64;
    }
  }

 private:
  struct Frame {
    uint32_t resume = 0;
    std::vector<InFlightOperand> pool;
    std::vector<PendingTransfer> transfers;
    uint64_t frame_base = 0;
    uint64_t frame_size = 0;
  };

  void init() {
    if (config_.xlen_bits != 16 && config_.xlen_bits != 32 &&
        config_.xlen_bits != 64) {
      throw std::invalid_argument("xlen must be 16, 32 or 64");
    }
    memory_.assign(config_.memory_size, 0);
    const uint64_t image_bytes = 2 * words_.size();
    if (config_.program_base > config_.memory_size ||
        image_bytes > config_.memory_size - config_.program_base) {
      throw std::invalid_argument("program image does not fit in memory");
    }
    for (size_t i = 0; i < words_.size(); ++i) {
      memory_[config_.program_base + 2 * i] =
          static_cast<uint8_t>(words_[i] & 0xFF);
      memory_[config_.program_base + 2 * i + 1] =
          static_cast<uint8_t>(words_[i] >> 8);
    }
    stack_base_ = config_.stack_base.value_or(config_.memory_size);
    const uint64_t default_size =
        std::min<uint64_t>(uint64_t{64} * 1024, config_.memory_size);
    stack_size_ = config_.stack_size.value_or(default_size);
    if (stack_base_ > config_.memory_size || stack_size_ > stack_base_) {
      throw std::invalid_argument("stack region outside memory");
    }
    stack_top_ = stack_base_;
    frame_base_ = stack_top_;
    frame_size_ = 0;
    next_index_ = config_.entry;
  }

  uint64_t xlen_mask() const {
    return config_.xlen_bits >= 64 ? ~uint64_t{0}
                                   : (uint64_t{1} << config_.xlen_bits) - 1;
  }

  uint64_t instruction_address(uint32_t index) const {
    return config_.program_base + 2 * uint64_t{index};
  }

  // ---- tracing helpers ----

  void note(std::string text) {
    if (trace_) notes_.push_back(std::move(text));
  }

  void finish_step_trace(const Instruction& ins) {
    if (!trace_) return;
    std::string line = "step=" + std::to_string(steps_ - 1) +
                       " idx=" + std::to_string(current_index_) + " " +
                       std::string(mnemonic(ins)) + " in=[";
    for (size_t i = 0; i < delivered_.size(); ++i) {
      if (i) line += ",";
      line += delivered_[i].to_string();
    }
    line += "] out=[" + out_text_ + "] note=";
    for (size_t i = 0; i < notes_.size(); ++i) {
      if (i) line += ";";
      line += notes_[i];
    }
    *trace_ += line + "\n";
  }

  std::string halt_line() const {
    switch (outcome_.kind) {
      case Outcome::Kind::returned: {
        std::string line = "halt=returned values=[";
        for (size_t i = 0; i < outcome_.values.size(); ++i) {
          if (i) line += ",";
          line += outcome_.values[i].to_string();
        }
        return line + "]\n";
      }
      case Outcome::Kind::trapped:
        return "halt=trapped cause=" + std::string(to_string(outcome_.cause)) +
               "\n";
      case Outcome::Kind::timeout:
        return "halt=timeout\n";
      default:
        return "halt=running\n";
    }
  }

  // ---- phase 1 ----

  void deliver() {
    delivered_.clear();
    std::vector<InFlightOperand> due;
    auto keep = pool_.begin();
    for (auto it = pool_.begin(); it != pool_.end(); ++it) {
      if (it->remaining == 0) {
        due.push_back(*it);
      } else {
        *keep++ = *it;
      }
    }
    pool_.erase(keep, pool_.end());
    std::sort(due.begin(), due.end(),
              [](const InFlightOperand& a, const InFlightOperand& b) {
                return a.seq < b.seq;
              });
    if (due.size() > kMaxOperands) {
      const auto dropped = due.size() - kMaxOperands;
      stats_.capacity_dropped += dropped;
      note("dropped:" + std::to_string(dropped));
      due.resize(kMaxOperands);
    }
    for (const InFlightOperand& op : due) delivered_.push_back(op.value);
  }

  // ---- phase 2 ----

  void produce(TaggedValue v, uint32_t remaining) {
    produced_.push_back({v, remaining, seq_++});
    ++stats_.produced;
    if (trace_) {
      if (!out_text_.empty()) out_text_ += ",";
      out_text_ += "(" + v.to_string() + ")->+" + std::to_string(remaining);
    }
  }

  void halt_trap(TrapCause cause) {
    trap_ = cause;
    note("trap:" + std::string(to_string(cause)));
    outcome_.kind = Outcome::Kind::trapped;
    outcome_.cause = cause;
    outcome_.steps = steps_;
  }

  void arm(PendingTransfer::Kind kind, int64_t target, uint32_t countdown) {
    transfers_.push_back({kind, target, countdown});
    switch (kind) {
      case PendingTransfer::Kind::jump: note("arm:jump"); break;
      case PendingTransfer::Kind::call: note("arm:call"); break;
      case PendingTransfer::Kind::ret: note("arm:ret"); break;
    }
  }

  /// Marks everything delivered past `arity` as unused.
  void consume(size_t arity) {
    if (delivered_.size() > arity) {
      const auto extra = delivered_.size() - arity;
      stats_.arity_dropped += extra;
      note("extra:" + std::to_string(extra));
      stats_.consumed += arity;
    } else {
      stats_.consumed += delivered_.size();
    }
  }

  const TaggedValue* in(size_t i) const {
    return i < delivered_.size() ? &delivered_[i] : nullptr;
  }

  /// Effective byte address for a load/store: base operand plus an
  /// optional displacement, scaled by the access width for unsigned
  /// displacements and raw for signed ones.
  std::optional<uint64_t> effective_address(const TaggedValue& base,
                                            const TaggedValue* disp,
                                            unsigned access_bytes) {
    const auto addr = normalize_address(
        base, instruction_address(current_index_), config_.xlen_bits);
    if (!addr) return std::nullopt;
    uint64_t a = *addr;
    if (disp) {
      if (disp->is_nar()) return std::nullopt;
      if (disp->tag().is_signed()) {
        a += static_cast<uint64_t>(disp->svalue());
      } else {
        a += disp->uvalue() * access_bytes;
      }
      a &= xlen_mask();
    }
    return a;
  }

  bool memory_range_ok(uint64_t addr, unsigned bytes) const {
    return addr <= memory_.size() && bytes <= memory_.size() - addr;
  }

  uint64_t load_le(uint64_t addr, unsigned bytes) const {
    uint64_t v = 0;
    for (unsigned i = 0; i < bytes; ++i) {
      v |= uint64_t{memory_[addr + i]} << (8 * i);
    }
    return v;
  }

  void store_le(uint64_t addr, uint64_t v, unsigned bytes) {
    for (unsigned i = 0; i < bytes; ++i) {
      memory_[addr + i] = static_cast<uint8_t>(v >> (8 * i));
    }
  }

  void execute(const Instruction& ins) {
    struct Visitor {
      Machine& m;

      void operator()(const Trap&) {
        m.consume(0);
        m.halt_trap(TrapCause::software);
      }

      void operator()(const Nop&) { m.consume(kMaxOperands); }

      void operator()(const St&) {
        m.consume(3);
        const TaggedValue* value = m.in(0);
        const TaggedValue* base = m.in(1);
        const TaggedValue* disp = m.in(2);
        if (!value || !base) {
          m.halt_trap(TrapCause::missing_operand);
          return;
        }
        if (value->is_nar() || base->is_nar() || (disp && disp->is_nar())) {
          m.halt_trap(TrapCause::nar_store);
          return;
        }
        const unsigned bytes = value->tag().width_bytes();
        const auto addr = m.effective_address(*base, disp, bytes);
        if (!addr || !m.memory_range_ok(*addr, bytes)) {
          m.halt_trap(TrapCause::bad_address);
          return;
        }
        m.store_le(*addr, value->bits(), bytes);
      }

      void operator()(const Rsrv& r) {
        m.consume(0);
        const uint64_t amount = uint64_t{r.bytes} * (r.unit16 ? 16 : 1);
        const uint64_t limit = m.stack_base_ - m.stack_size_;
        if (amount > m.stack_top_ || m.stack_top_ - amount < limit) {
          m.halt_trap(TrapCause::stack_fault);
          return;
        }
        m.stack_top_ -= amount;
        m.frame_base_ = m.stack_top_;
        m.frame_size_ += amount;
      }

      void operator()(const Free& f) {
        m.consume(0);
        const uint64_t amount = uint64_t{f.bytes} * (f.unit16 ? 16 : 1);
        if (amount > m.frame_size_) {
          m.halt_trap(TrapCause::stack_fault);
          return;
        }
        m.stack_top_ += amount;
        m.frame_base_ = m.stack_top_;
        m.frame_size_ -= amount;
      }

      void operator()(const Sts& s) {
        m.consume(1);
        const TaggedValue* value = m.in(0);
        if (!value) {
          m.halt_trap(TrapCause::missing_operand);
          return;
        }
        if (value->is_nar()) {
          m.halt_trap(TrapCause::nar_store);
          return;
        }
        const unsigned bytes = value->tag().width_bytes();
        const uint64_t offset = uint64_t{s.slot} * bytes;
        const uint64_t addr = m.frame_base_ + offset;
        if (offset + bytes > m.frame_size_ || !m.memory_range_ok(addr, bytes)) {
          m.halt_trap(TrapCause::bad_address);
          return;
        }
        m.store_le(addr, value->bits(), bytes);
      }

      void operator()(const Call& c) {
        m.consume(1);
        const TaggedValue* target = m.in(0);
        if (!target) {
          m.halt_trap(TrapCause::missing_operand);
          return;
        }
        if (target->is_nar()) {
          m.halt_trap(TrapCause::nar_control);
          return;
        }
        const auto addr = normalize_address(
            *target, m.instruction_address(m.current_index_),
            m.config_.xlen_bits);
        if (!addr || *addr < m.config_.program_base ||
            (*addr - m.config_.program_base) % 2 != 0) {
          m.halt_trap(TrapCause::bad_address);
          return;
        }
        const int64_t index =
            static_cast<int64_t>((*addr - m.config_.program_base) / 2);
        m.arm(PendingTransfer::Kind::call, index, c.trig);
      }

      void operator()(const Ret& r) {
        m.consume(0);
        m.arm(PendingTransfer::Kind::ret, 0, r.trig);
      }

      void operator()(const Saddr& s) {
        m.consume(0);
        const uint64_t addr =
            (m.frame_base_ + (uint64_t{s.slot} << s.size_log2)) & m.xlen_mask();
        m.produce(TaggedValue::value(addr, m.address_tag()), 0);
      }

      void operator()(const Grow& g) {
        m.consume(1);
        const TaggedValue* input = m.in(0);
        if (!input) {
          m.produce(TaggedValue::nar(NarCode::missing_operand), 0);
          return;
        }
        if (input->is_nar()) {
          m.produce(TaggedValue::nar(NarCode::propagated), 0);
          return;
        }
        m.produce(
            TaggedValue::value(input->bits() << 8 | g.imm, input->tag()), 0);
      }

      void operator()(const LdStack& l) {
        m.consume(0);
        const unsigned bytes = l.type.width_bytes();
        const uint64_t offset = uint64_t{l.slot} * bytes;
        const uint64_t addr = m.frame_base_ + offset;
        if (offset + bytes > m.frame_size_ || !m.memory_range_ok(addr, bytes)) {
          m.produce(TaggedValue::nar(NarCode::bad_address), 0);
          return;
        }
        m.produce(TaggedValue::value(m.load_le(addr, bytes), l.type), 0);
      }

      void operator()(const Const& c) {
        m.consume(0);
        const uint64_t bits = c.type.is_signed()
                                  ? static_cast<uint64_t>(sign_extend(c.imm, 8))
                                  : c.imm;
        m.produce(TaggedValue::value(bits, c.type), 0);
      }

      void operator()(const Fence& f) {
        m.consume(0);
        m.note("succ:" + std::to_string(unsigned{f.succ}));
        m.note("pred:" + std::to_string(unsigned{f.pred}));
      }

      void operator()(const Jmp& j) {
        m.consume(1);
        const TaggedValue* cond = m.in(0);
        if (!cond) {
          m.halt_trap(TrapCause::missing_operand);
          return;
        }
        if (cond->is_nar()) {
          m.halt_trap(TrapCause::nar_control);
          return;
        }
        if (cond->truthy()) {
          m.arm(PendingTransfer::Kind::jump,
                static_cast<int64_t>(m.current_index_) + j.offset, j.trig);
        }
      }

      void operator()(const Pick& p) {
        m.consume(3);
        m.produce(m.pick_value(0), p.ref);
      }

      void operator()(const PickImm& p) {
        m.consume(4);
        const TaggedValue* chosen = m.in(p.index);
        m.produce(chosen ? *chosen : TaggedValue::nar(NarCode::missing_operand),
                  p.ref);
      }

      void operator()(const Ld& l) {
        m.consume(2);
        const TaggedValue* base = m.in(0);
        if (!base) {
          m.produce(TaggedValue::nar(NarCode::missing_operand), l.ref);
          return;
        }
        const unsigned bytes = l.type.width_bytes();
        const auto addr = m.effective_address(*base, m.in(1), bytes);
        if (!addr || !m.memory_range_ok(*addr, bytes)) {
          m.produce(TaggedValue::nar(NarCode::bad_address), l.ref);
          return;
        }
        m.produce(TaggedValue::value(m.load_le(*addr, bytes), l.type), l.ref);
      }

      void operator()(const Cast& c) {
        m.consume(1);
        const TaggedValue* input = m.in(0);
        if (!input) {
          m.produce(TaggedValue::nar(NarCode::missing_operand), c.ref);
          return;
        }
        m.produce(cast_value(*input, c.type), c.ref);
      }

      void operator()(const EchoLong& e) {
        m.consume(kMaxOperands);
        for (const TaggedValue& v : m.delivered_) m.produce(v, e.ref);
      }

      void operator()(const Alu& a) {
        m.consume(2);
        const TaggedValue* first = m.in(0);
        const AluOp op = a.op();
        if (!first) {
          // No operands at all: isnar still reports "no NaR seen".
          if (op == AluOp::is_nar) {
            m.produce(TaggedValue::value(0, u8), a.ref);
          } else {
            m.produce(TaggedValue::nar(NarCode::missing_operand), a.ref);
            if (alu_two_output(op)) {
              m.route_high(a, TaggedValue::nar(NarCode::missing_operand));
            }
          }
          return;
        }
        std::optional<TaggedValue> second;
        if (const TaggedValue* s = m.in(1)) second = *s;
        const AluResult r =
            alu_apply(op, *first, second, m.config_.xlen_bits / 8);
        switch (a.variant()) {
          case AluVariant::single:
            m.produce(r.low, a.ref);
            break;
          case AluVariant::low_high_same:
            m.produce(r.low, a.ref);
            m.produce(*r.high, a.ref);
            break;
          case AluVariant::high_low_same:
            m.produce(*r.high, a.ref);
            m.produce(r.low, a.ref);
            break;
          case AluVariant::low_ref_high_next:
            m.produce(r.low, a.ref);
            m.produce(*r.high, 0);
            break;
          case AluVariant::high_ref_low_next:
            m.produce(*r.high, a.ref);
            m.produce(r.low, 0);
            break;
          case AluVariant::low_ref_high_drop:
            m.produce(r.low, a.ref);
            break;
          case AluVariant::high_ref_low_drop:
            m.produce(*r.high, a.ref);
            break;
        }
      }

      void operator()(const Echo& e) {
        m.consume(e.pass_next ? 4 : 2);
        if (const TaggedValue* v = m.in(0)) m.produce(*v, e.ref);
        if (const TaggedValue* v = m.in(1)) m.produce(*v, e.ref2);
        if (e.pass_next) {
          if (const TaggedValue* v = m.in(2)) m.produce(*v, 0);
          if (const TaggedValue* v = m.in(3)) m.produce(*v, 0);
        }
      }

      void operator()(const Dup& d) {
        m.consume(kMaxOperands);
        for (const TaggedValue& v : m.delivered_) {
          m.produce(v, d.ref);
          m.produce(v, d.ref2);
          if (d.pass_next) m.produce(v, 0);
        }
      }
    };
    std::visit(Visitor{*this}, ins);
  }

  /// pick: a truthy condition selects the second delivered operand, a
  /// false one the third; a NaR condition poisons the output.
  TaggedValue pick_value(size_t cond_index) const {
    const TaggedValue* cond = in(cond_index);
    if (!cond) return TaggedValue::nar(NarCode::missing_operand);
    if (cond->is_nar()) return TaggedValue::nar(NarCode::propagated);
    const TaggedValue* chosen = in(cond->truthy() ? 1 : 2);
    if (!chosen) return TaggedValue::nar(NarCode::missing_operand);
    return *chosen;
  }

  // ---- phase 4 ----

  int64_t fire(const PendingTransfer& transfer, uint32_t index, bool& halted) {
    switch (transfer.kind) {
      case PendingTransfer::Kind::jump: {
        note("fire:jump->" + std::to_string(transfer.target));
        const int64_t target = transfer.target;
        erase_fired();
        return target;
      }
      case PendingTransfer::Kind::call: {
        note("fire:call->" + std::to_string(transfer.target));
        const int64_t target = transfer.target;
        Frame frame;
        frame.resume = index + 1;
        frame.frame_base = frame_base_;
        frame.frame_size = frame_size_;
        std::vector<InFlightOperand> args;
        for (const InFlightOperand& op : pool_) {
          (op.remaining == 0 ? args : frame.pool).push_back(op);
        }
        erase_fired();
        frame.transfers = std::move(transfers_);
        transfers_.clear();
        frames_.push_back(std::move(frame));
        pool_ = std::move(args);
        frame_base_ = stack_top_;
        frame_size_ = 0;
        return target;
      }
      case PendingTransfer::Kind::ret: {
        note("fire:ret");
        std::vector<InFlightOperand> values;
        uint64_t leftovers = 0;
        for (const InFlightOperand& op : pool_) {
          if (op.remaining == 0) {
            values.push_back(op);
          } else {
            ++leftovers;
          }
        }
        std::sort(values.begin(), values.end(),
                  [](const InFlightOperand& a, const InFlightOperand& b) {
                    return a.seq < b.seq;
                  });
        if (values.size() > kMaxOperands) {
          leftovers += values.size() - kMaxOperands;
          values.resize(kMaxOperands);
        }
        stats_.discarded_at_return += leftovers;
        stack_top_ = frame_base_ + frame_size_;
        pool_.clear();
        if (frames_.empty()) {
          outcome_.kind = Outcome::Kind::returned;
          for (const InFlightOperand& op : values) {
            outcome_.values.push_back(op.value);
          }
          stats_.returned += values.size();
          halted = true;
          return 0;
        }
        Frame frame = std::move(frames_.back());
        frames_.pop_back();
        pool_ = std::move(frame.pool);
        pool_.insert(pool_.end(), values.begin(), values.end());
        transfers_ = std::move(frame.transfers);
        frame_base_ = frame.frame_base;
        frame_size_ = frame.frame_size;
        return frame.resume;
      }
    }
    return 0;
  }

  void erase_fired() {
    for (auto it = transfers_.begin(); it != transfers_.end(); ++it) {
      if (it->countdown == 0) {
        transfers_.erase(it);
        break;
      }
    }
  }

  void route_high(const Alu& a, TaggedValue v) {
    switch (a.variant()) {
      case AluVariant::low_high_same:
      case AluVariant::high_low_same:
        produce(v, a.ref);
        break;
      case AluVariant::low_ref_high_next:
      case AluVariant::high_ref_low_next:
        produce(v, 0);
        break;
      default:
        break;
    }
  }

  RunConfig config_;
  std::vector<Word> words_;
  std::vector<Instruction> program_;
  std::vector<uint8_t> memory_;

  int64_t next_index_ = 0;
  uint32_t current_index_ = 0;
  uint64_t steps_ = 0;
  uint64_t seq_ = 0;

  std::vector<InFlightOperand> pool_;
  std::vector<PendingTransfer> transfers_;
  std::vector<Frame> frames_;
  uint64_t stack_base_ = 0;
  uint64_t stack_size_ = 0;
  uint64_t stack_top_ = 0;
  uint64_t frame_base_ = 0;
  uint64_t frame_size_ = 0;

  std::vector<TaggedValue> delivered_;
  std::vector<InFlightOperand> produced_;
  Outcome outcome_;
  OperandStats stats_;
  std::optional<TrapCause> trap_;

  std::string* trace_ = nullptr;
  bool halt_traced_ = false;
  std::vector<std::string> notes_;
  std::string out_text_;

  friend struct MachineTestPeer;
};

}  // namespace scry
