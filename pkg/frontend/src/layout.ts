/** Map layout: survey coordinates when the database carries them, else a
 * deterministic seeded force-directed embedding. The view never invents
 * topology — only positions. */

import type { WorldDoc } from "./types.js";

export interface LayoutPoint {
  x: number;
  y: number;
}

export interface MapLayout {
  manholes: Map<string, LayoutPoint>;
  /** Dead-end pipes get a phantom endpoint so they can be drawn. */
  stubEnds: Map<string, LayoutPoint>;
}

/** Deterministic PRNG (mulberry32) so force layouts reproduce exactly. */
export function mulberry32(seed: number): () => number {
  let a = seed >>> 0;
  return () => {
    a |= 0;
    a = (a + 0x6d2b79f5) | 0;
    let t = Math.imul(a ^ (a >>> 15), 1 | a);
    t = (t + Math.imul(t ^ (t >>> 7), 61 | t)) ^ t;
    return ((t ^ (t >>> 14)) >>> 0) / 4294967296;
  };
}

function forceLayout(world: WorldDoc, seed: number): Map<string, LayoutPoint> {
  const ids = world.manholes.map((m) => m.id);
  const rand = mulberry32(seed);
  const pos = new Map<string, LayoutPoint>();
  for (const id of ids) {
    pos.set(id, { x: rand() * 400, y: rand() * 400 });
  }
  const edges: [string, string][] = [];
  for (const p of world.pipes) {
    if (p.endpoints.length === 2) {
      edges.push([p.endpoints[0][0], p.endpoints[1][0]]);
    }
  }
  const spring = 120;
  for (let iter = 0; iter < 300; iter++) {
    const force = new Map<string, LayoutPoint>(
      ids.map((id) => [id, { x: 0, y: 0 }]),
    );
    for (let i = 0; i < ids.length; i++) {
      for (let j = i + 1; j < ids.length; j++) {
        const a = pos.get(ids[i])!;
        const b = pos.get(ids[j])!;
        const dx = a.x - b.x;
        const dy = a.y - b.y;
        const d2 = Math.max(dx * dx + dy * dy, 1);
        const rep = 6000 / d2;
        const d = Math.sqrt(d2);
        force.get(ids[i])!.x += (dx / d) * rep;
        force.get(ids[i])!.y += (dy / d) * rep;
        force.get(ids[j])!.x -= (dx / d) * rep;
        force.get(ids[j])!.y -= (dy / d) * rep;
      }
    }
    for (const [a, b] of edges) {
      const pa = pos.get(a)!;
      const pb = pos.get(b)!;
      const dx = pb.x - pa.x;
      const dy = pb.y - pa.y;
      const d = Math.max(Math.sqrt(dx * dx + dy * dy), 1);
      const pull = (d - spring) * 0.02;
      force.get(a)!.x += (dx / d) * pull;
      force.get(a)!.y += (dy / d) * pull;
      force.get(b)!.x -= (dx / d) * pull;
      force.get(b)!.y -= (dy / d) * pull;
    }
    const cool = 1 - iter / 300;
    for (const id of ids) {
      const f = force.get(id)!;
      const p = pos.get(id)!;
      p.x += Math.max(-12, Math.min(12, f.x)) * cool;
      p.y += Math.max(-12, Math.min(12, f.y)) * cool;
    }
  }
  return pos;
}

export function layoutWorld(world: WorldDoc, seed = 1): MapLayout {
  const haveCoords = world.manholes.every((m) => m.coord !== null);
  const manholes = new Map<string, LayoutPoint>();
  if (haveCoords) {
    for (const m of world.manholes) {
      manholes.set(m.id, { x: m.coord![0], y: m.coord![1] });
    }
  } else {
    for (const [id, p] of forceLayout(world, seed)) {
      manholes.set(id, p);
    }
  }
  const stubEnds = new Map<string, LayoutPoint>();
  for (const pipe of world.pipes) {
    if (pipe.endpoints.length !== 1) continue;
    const [mid] = pipe.endpoints[0];
    const origin = manholes.get(mid)!;
    const manhole = world.manholes.find((m) => m.id === mid)!;
    const port = manhole.ports.find((p) => p.pipe === pipe.id)!;
    const theta = ((port.angle_deg - 90) * Math.PI) / 180; // 0 deg points up
    stubEnds.set(pipe.id, {
      x: origin.x + Math.cos(theta) * 60,
      y: origin.y + Math.sin(theta) * 60,
    });
  }
  return { manholes, stubEnds };
}

/** Endpoints of a pipe's drawn segment. */
export function pipeSegment(
  world: WorldDoc,
  layout: MapLayout,
  pipeId: string,
): [LayoutPoint, LayoutPoint] {
  const pipe = world.pipes.find((p) => p.id === pipeId);
  if (!pipe) throw new Error(`unknown pipe ${pipeId}`);
  if (pipe.endpoints.length === 2) {
    return [
      layout.manholes.get(pipe.endpoints[0][0])!,
      layout.manholes.get(pipe.endpoints[1][0])!,
    ];
  }
  return [
    layout.manholes.get(pipe.endpoints[0][0])!,
    layout.stubEnds.get(pipeId)!,
  ];
}
