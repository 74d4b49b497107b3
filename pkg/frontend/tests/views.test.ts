import { describe, expect, it } from "vitest";

import {
  escapeHtml,
  renderConfirmation,
  renderError,
  renderRecordsTable,
  renderStats,
  renderVerifyBanner,
} from "../src/views.js";
import type { StatsReport, TravelRecord } from "../src/types.js";

const OPEN_TRIP: TravelRecord = {
  passport_number: "U1",
  name_surname: "Ali Veli",
  nationality: "Turkish",
  birthdate: "1995-08-12",
  entry_date: "2025-12-08 13:36",
  entry_gate: "Istanbul Airport",
  exit_date: "",
  exit_gate: "",
  plate: "",
  entry_block_index: 1,
  exit_block_index: null,
  status: "open",
};

const CLOSED_TRIP: TravelRecord = {
  ...OPEN_TRIP,
  passport_number: "U2",
  exit_date: "2025-12-20 10:00",
  exit_gate: "Kapikule Gate",
  entry_block_index: 2,
  exit_block_index: 5,
  status: "closed",
};

describe("renderRecordsTable", () => {
  it("renders one row per logical trip, never per block", () => {
    const html = renderRecordsTable([OPEN_TRIP, CLOSED_TRIP]);
    expect(html.match(/<tr class="trip-/g)).toHaveLength(2);
  });

  it("distinguishes open trips from closed ones", () => {
    const html = renderRecordsTable([OPEN_TRIP, CLOSED_TRIP]);
    expect(html).toContain('class="trip-open"');
    expect(html).toContain('class="trip-closed"');
  });

  it("shows both block indices for a closed trip", () => {
    const html = renderRecordsTable([CLOSED_TRIP]);
    expect(html).toContain("#2 → #5");
  });

  it("renders an empty state", () => {
    expect(renderRecordsTable([])).toContain("empty-state");
  });

  it("escapes data-derived text", () => {
    const hostile = { ...OPEN_TRIP, name_surname: '<script>alert(1)</script>' };
    const html = renderRecordsTable([hostile]);
    expect(html).not.toContain("<script>");
    expect(html).toContain("&lt;script&gt;");
  });
});

describe("renderVerifyBanner", () => {
  it("renders unchecked before first verification", () => {
    expect(renderVerifyBanner(null)).toContain("banner-unchecked");
  });

  it("renders green for a valid chain", () => {
    const html = renderVerifyBanner({ valid: true, violations: [] });
    expect(html).toContain("banner-valid");
  });

  it("lists violations with block indices when invalid", () => {
    const html = renderVerifyBanner({
      valid: false,
      violations: [
        { block_index: 5, kind: "RootMismatch", detail: "stored root differs" },
        { block_index: 5, kind: "HashMismatch", detail: "stored hash differs" },
      ],
    });
    expect(html).toContain("banner-invalid");
    expect(html).toContain("block 5");
    expect(html).toContain("RootMismatch");
    expect(html).toContain("2 violation(s)");
  });
});

describe("renderStats", () => {
  const report: StatsReport = {
    total_entries: 3,
    total_exits: 1,
    currently_inside: 2,
    per_gate: { "Istanbul Airport": { entries: 2, exits: 0 }, "Kapikule Gate": { entries: 1, exits: 1 } },
    per_nationality: { Turkish: 2, German: 1 },
    per_day: { "2025-12-08": { entries: 3, exits: 1 } },
  };

  it("shows totals and the currently-inside count", () => {
    const html = renderStats(report);
    expect(html).toContain("Entries: <strong>3</strong>");
    expect(html).toContain("Exits: <strong>1</strong>");
    expect(html).toContain("Currently inside: <strong>2</strong>");
  });

  it("renders per-gate and per-day breakdowns", () => {
    const html = renderStats(report);
    expect(html).toContain("Istanbul Airport");
    expect(html).toContain("2025-12-08");
    expect(html).toContain("German");
  });
});

describe("flash messages", () => {
  it("confirmation names the block index", () => {
    expect(renderConfirmation("entry", 7)).toContain("block #7");
    expect(renderConfirmation("exit", 9)).toContain("Exit recorded");
  });

  it("errors are escaped", () => {
    expect(renderError("<b>boom</b>")).toContain("&lt;b&gt;boom&lt;/b&gt;");
  });
});

describe("escapeHtml", () => {
  it("escapes the dangerous characters", () => {
    expect(escapeHtml(`<a href="x">&</a>`)).toBe("&lt;a href=&quot;x&quot;&gt;&amp;&lt;/a&gt;");
  });
});
