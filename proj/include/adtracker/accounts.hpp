#pragma once

// Reviewed signup, manager approval, sessions and the access policy.

#include <chrono>
#include <optional>
#include <string>
#include <string_view>

#include "adtracker/clock.hpp"
#include "adtracker/store.hpp"

namespace adtracker::accounts {

using store::Account;
using store::AccountStatus;
using store::Attestation;
using store::Role;

// Interactive is the production cost; Minimal keeps test suites fast.
enum class HashStrength { Interactive, Minimal };

// Salted argon2id hashes in the libsodium string format.
class PasswordHasher {
 public:
  explicit PasswordHasher(HashStrength strength = HashStrength::Interactive);

  [[nodiscard]] std::string hash(std::string_view password) const;
  [[nodiscard]] bool verify(const std::string& hash, std::string_view password) const;

 private:
  unsigned long long opslimit_;
  std::size_t memlimit_;
};

enum class Action { ReadJob, ExportJob, CreateJob, WriteJob, DeleteJob, ReadAds, ReviewAccount };
enum class Decision { Allow, Deny };

struct JobResource {
  AccountId owner;
  domain::Visibility visibility = domain::Visibility::Private;
};

// Pure policy. Non-approved accounts are denied everything; job reads and
// exports need ownership, the manager role or a PUBLIC job; job writes need
// ownership or the manager role; reviews need the manager role.
Decision authorize(const Account& user, Action action, const std::optional<JobResource>& job = std::nullopt);

struct SessionToken {
  std::string token;
  domain::Timestamp expires_at{};
};

class AccountService {
 public:
  static constexpr std::size_t kMinPasswordLength = 12;
  static constexpr std::chrono::hours kSessionLifetime{24};

  AccountService(store::Store& store, Clock& clock, HashStrength strength = HashStrength::Interactive);

  // New accounts start PENDING. Throws EmailTaken, WeakPassword, BadRequest.
  Account sign_up(const std::string& email, std::string_view password, Attestation attestation);
  // Throws Unauthenticated on unknown email or wrong password.
  SessionToken login(const std::string& email, std::string_view password);
  // Throws Unauthenticated for unknown or expired tokens.
  Account authenticate(const std::string& token);
  SessionToken renew(const std::string& token);
  void logout(const std::string& token);

  // Throws Unauthorized (reviewer is not a manager), UnknownAccount,
  // InvalidState (target already decided), BadRequest (decision PENDING).
  Account review(AccountId reviewer, AccountId target, AccountStatus decision);

  // Deploy-time creation of an APPROVED manager.
  Account bootstrap_manager(const std::string& email, std::string_view password);

  std::vector<Account> list(AccountId viewer, std::optional<AccountStatus> status);

 private:
  Account create(const std::string& email, std::string_view password, Role role, AccountStatus status,
                 Attestation attestation);

  store::Store& store_;
  Clock& clock_;
  PasswordHasher hasher_;
};

// Lower-cased, trimmed email; empty when the input is not plausibly an address.
std::string normalize_email(std::string_view email);

}  // namespace adtracker::accounts
