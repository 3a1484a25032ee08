import { readFileSync } from "node:fs";
import { join } from "node:path";
import { describe, expect, it } from "vitest";

import { layoutWorld, mulberry32, pipeSegment } from "../src/layout";
import type { WorldDoc } from "../src/types";

const world: WorldDoc = JSON.parse(
  readFileSync(join(__dirname, "fixtures", "world.json"), "utf-8"),
);

describe("map layout", () => {
  it("uses survey coordinates when the database carries them", () => {
    const layout = layoutWorld(world);
    expect(layout.manholes.get("M1")).toEqual({ x: 40, y: 360 });
    expect(layout.manholes.get("M9")).toEqual({ x: 330, y: -40 });
  });

  it("gives dead-end pipes a drawable phantom endpoint", () => {
    const layout = layoutWorld(world);
    for (const stub of ["P6", "P7", "P11"]) {
      expect(layout.stubEnds.has(stub)).toBe(true);
      const [a, b] = pipeSegment(world, layout, stub);
      expect(a).not.toEqual(b);
    }
  });

  it("falls back to a deterministic force layout without coordinates", () => {
    const bare: WorldDoc = {
      manholes: world.manholes.map((m) => ({ ...m, coord: null })),
      pipes: world.pipes,
    };
    const one = layoutWorld(bare, 7);
    const two = layoutWorld(bare, 7);
    expect([...one.manholes.entries()]).toEqual([...two.manholes.entries()]);
    const other = layoutWorld(bare, 8);
    expect([...one.manholes.entries()]).not.toEqual([...other.manholes.entries()]);
  });

  it("seeded PRNG repeats exactly", () => {
    const a = mulberry32(42);
    const b = mulberry32(42);
    expect([a(), a(), a()]).toEqual([b(), b(), b()]);
  });
});
