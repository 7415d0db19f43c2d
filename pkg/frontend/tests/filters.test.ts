import { describe, expect, it } from "vitest";

import { searchParams, validateFilters } from "../src/filters.js";

describe("validateFilters", () => {
  it("accepts empty inputs", () => {
    expect(validateFilters({}).ok).toBe(true);
  });

  it("rejects an inverted depth range", () => {
    const result = validateFilters({ depthMin: "50", depthMax: "10" });
    expect(result.ok).toBe(false);
    expect(result.errors.join(" ")).toMatch(/depth range is inverted/);
  });

  it("rejects an inverted time range", () => {
    const result = validateFilters({ from: "2024-06-01T00:00", to: "2024-01-01T00:00" });
    expect(result.ok).toBe(false);
    expect(result.errors.join(" ")).toMatch(/time range is inverted/);
  });

  it("rejects non-numeric depths", () => {
    expect(validateFilters({ depthMin: "deep" }).ok).toBe(false);
  });

  it("accepts a proper range", () => {
    expect(validateFilters({ depthMin: "5", depthMax: "40" }).ok).toBe(true);
  });
});

describe("searchParams", () => {
  it("carries only the set filters", () => {
    const params = searchParams("a shark", 10, { location: "HK", species: "shark,ray" });
    expect(params.get("q")).toBe("a shark");
    expect(params.get("k")).toBe("10");
    expect(params.get("location")).toBe("HK");
    expect(params.get("species")).toBe("shark,ray");
    expect(params.has("depth_min")).toBe(false);
    expect(params.has("from")).toBe(false);
  });

  it("carries none when all filters are cleared", () => {
    const params = searchParams("a shark", 5, {});
    expect([...params.keys()].sort()).toEqual(["k", "q"]);
  });

  it("maps camelCase fields to wire names", () => {
    const params = searchParams("x", 1, { depthMin: "5", depthMax: "40" });
    expect(params.get("depth_min")).toBe("5");
    expect(params.get("depth_max")).toBe("40");
  });
});
