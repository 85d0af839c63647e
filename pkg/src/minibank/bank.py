"""In-memory DebitCredit bank: Branch, Teller, Account balance tables plus the
append-only History table.

Balances are 64-bit integer micro-dollars so conservation (sum of accounts ==
sum of tills == sum of branch balances == sum of history amounts) is exact and
order-independent. Teller and account IDs encode their home branch in the
high digits: id = branch_id * branch_radix + sequence_number.

Each balance table is split into fixed 256-row pages. A page carries its own
lock, the LSN of the last update applied to it, and a dirty bit. Transactions
lock the three pages they touch in (table rank, page) order, which is a total
order, so deadlock is impossible. The checkpointer captures a page under the
same lock, which is what makes fuzzy checkpoints safe to take mid-run.
"""

from __future__ import annotations

import threading
from dataclasses import dataclass

MICRO_PER_DOLLAR = 1_000_000

ROWS_PER_PAGE = 256

# Table ranks: the global lock-acquisition and log-replay ordering.
BRANCH, TELLER, ACCOUNT, HISTORY = 0, 1, 2, 3

TABLE_NAMES = {BRANCH: "branch", TELLER: "teller", ACCOUNT: "account", HISTORY: "history"}


class UnknownRowError(KeyError):
    """Teller or account ID does not exist in this bank."""


@dataclass(frozen=True)
class ScaleConfig:
    """Bank sizing: branches is the free variable, the rest are the classic
    DebitCredit constants (10 tellers and 10,000 accounts per branch, branch
    packed into IDs at radix 1,000,000)."""

    branches: int
    tellers_per_branch: int = 10
    accounts_per_branch: int = 10_000
    branch_radix: int = 1_000_000

    def __post_init__(self) -> None:
        if self.branches < 0:
            raise ValueError("branches must be >= 0")
        if self.tellers_per_branch <= 0 or self.accounts_per_branch <= 0:
            raise ValueError("per-branch row counts must be positive")
        if self.branch_radix <= self.accounts_per_branch:
            raise ValueError("branch_radix must exceed accounts_per_branch")
        if self.branch_radix <= self.tellers_per_branch:
            raise ValueError("branch_radix must exceed tellers_per_branch")

    @property
    def teller_count(self) -> int:
        return self.branches * self.tellers_per_branch

    @property
    def account_count(self) -> int:
        return self.branches * self.accounts_per_branch


class TablePages:
    """One balance table: a flat row array plus per-page lock/LSN/dirty state."""

    __slots__ = ("rows", "page_count", "locks", "page_lsn", "dirty")

    def __init__(self, nrows: int):
        self.rows: list[int] = [0] * nrows
        self.page_count = (nrows + ROWS_PER_PAGE - 1) // ROWS_PER_PAGE
        self.locks = [threading.Lock() for _ in range(self.page_count)]
        self.page_lsn = [0] * self.page_count
        self.dirty = [False] * self.page_count

    def apply(self, index: int, delta: int, lsn: int) -> int:
        """Apply a balance delta under the page lock already held by the caller.

        Returns the new balance. Also advances the page LSN and marks the
        page dirty for the next checkpoint.
        """
        rows = self.rows
        rows[index] += delta
        page = index // ROWS_PER_PAGE
        if lsn > self.page_lsn[page]:
            self.page_lsn[page] = lsn
        self.dirty[page] = True
        return rows[index]


@dataclass(frozen=True)
class BankSnapshot:
    """Exact integer sums and row counts for conservation checks (quiesced)."""

    sum_branches: int
    sum_tellers: int
    sum_accounts: int
    sum_history: int
    branch_count: int
    teller_count: int
    account_count: int
    history_count: int

    @property
    def conserved(self) -> bool:
        return self.sum_branches == self.sum_tellers == self.sum_accounts == self.sum_history


class Bank:
    """All four tables plus the page bookkeeping the engine and checkpointer share."""

    def __init__(self, config: ScaleConfig):
        self.config = config
        self.branches = TablePages(config.branches)
        self.tellers = TablePages(config.teller_count)
        self.accounts = TablePages(config.account_count)
        # History rows are (timestamp_us, branch, teller, account, amount).
        self.history: list[tuple[int, int, int, int, int]] = []
        self.history_lock = threading.Lock()

    def table(self, rank: int) -> TablePages:
        if rank == BRANCH:
            return self.branches
        if rank == TELLER:
            return self.tellers
        if rank == ACCOUNT:
            return self.accounts
        raise ValueError(f"no balance table with rank {rank}")

    # ID <-> dense index arithmetic. Raw IDs are sparse (branch at radix 1e6);
    # rows are stored densely at branch * per_branch + sequence.

    def teller_index(self, teller_id: int) -> int:
        cfg = self.config
        branch, seq = divmod(teller_id, cfg.branch_radix)
        if teller_id < 0 or branch >= cfg.branches or seq >= cfg.tellers_per_branch:
            raise UnknownRowError(f"teller {teller_id}")
        return branch * cfg.tellers_per_branch + seq

    def account_index(self, account_id: int) -> int:
        cfg = self.config
        branch, seq = divmod(account_id, cfg.branch_radix)
        if account_id < 0 or branch >= cfg.branches or seq >= cfg.accounts_per_branch:
            raise UnknownRowError(f"account {account_id}")
        return branch * cfg.accounts_per_branch + seq

    def index_for(self, rank: int, key: int) -> int:
        """Dense row index for a raw key of the given table rank."""
        if rank == BRANCH:
            if key < 0 or key >= self.config.branches:
                raise UnknownRowError(f"branch {key}")
            return key
        if rank == TELLER:
            return self.teller_index(key)
        if rank == ACCOUNT:
            return self.account_index(key)
        raise ValueError(f"no balance table with rank {rank}")

    def teller_id(self, index: int) -> int:
        cfg = self.config
        branch, seq = divmod(index, cfg.tellers_per_branch)
        return branch * cfg.branch_radix + seq

    def account_id(self, index: int) -> int:
        cfg = self.config
        branch, seq = divmod(index, cfg.accounts_per_branch)
        return branch * cfg.branch_radix + seq


def create_bank(config: ScaleConfig) -> Bank:
    """Populate a fresh bank: every balance zero, history empty.

    Mirrors the classic fill procedure: branches * 1 branch rows, * 10 teller
    rows, * 10,000 account rows, IDs encoded at the branch radix.
    """
    return Bank(config)


def read_snapshot(bank: Bank) -> BankSnapshot:
    """Exact sums over all tables. Caller must have quiesced the engine."""
    return BankSnapshot(
        sum_branches=sum(bank.branches.rows),
        sum_tellers=sum(bank.tellers.rows),
        sum_accounts=sum(bank.accounts.rows),
        sum_history=sum(row[4] for row in bank.history),
        branch_count=len(bank.branches.rows),
        teller_count=len(bank.tellers.rows),
        account_count=len(bank.accounts.rows),
        history_count=len(bank.history),
    )
