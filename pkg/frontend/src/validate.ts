/**
 * Client-side draft validation mirroring the service's playbook rules:
 * a START entry node, edges between known nodes, no self-loops, and
 * every node reachable from the start. The UI refuses to enter states
 * that would be rejected server-side.
 */

import { START_MODULE, type Draft } from "./types.js";

export function draftViolations(draft: Draft): string[] {
  const problems: string[] = [];
  const ids = new Set<string>();
  for (const node of draft.nodes) {
    if (ids.has(node.id)) problems.push(`duplicate node id ${node.id}`);
    ids.add(node.id);
  }
  const startNode = draft.nodes.find((n) => n.id === draft.start);
  if (!startNode) {
    problems.push(`start node ${draft.start} missing`);
  } else if (startNode.module !== START_MODULE) {
    problems.push(`start node must carry module ${START_MODULE}`);
  }
  for (const [a, b] of draft.edges) {
    if (a === b) problems.push(`self-loop on ${a}`);
    if (!ids.has(a) || !ids.has(b)) problems.push(`edge (${a}, ${b}) leaves the node set`);
  }
  // reachability from start over directed edges
  const out = new Map<string, string[]>();
  for (const [a, b] of draft.edges) {
    if (!out.has(a)) out.set(a, []);
    out.get(a)!.push(b);
  }
  const seen = new Set<string>(ids.has(draft.start) ? [draft.start] : []);
  const stack = [...seen];
  while (stack.length) {
    const cur = stack.pop()!;
    for (const next of out.get(cur) ?? []) {
      if (!seen.has(next)) {
        seen.add(next);
        stack.push(next);
      }
    }
  }
  for (const id of ids) {
    if (!seen.has(id)) problems.push(`node ${id} unreachable from start`);
  }
  return problems;
}
