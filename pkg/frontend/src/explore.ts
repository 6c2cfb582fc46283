import { ApiClient, ApiError } from './api.js';
import type { Cluster, Inventory } from './types.js';

export type InventoryPanel =
  | { state: 'empty' }
  | { state: 'unknown'; entity: string }
  | { state: 'ready'; inventory: Inventory };

export type ClusterPanel =
  | { state: 'empty' }
  | { state: 'unknown'; seed: string }
  | { state: 'ready'; cluster: Cluster };

// Explore state: inventory and cluster lookups with explicit empty states
// for unknown names, so a typo reads as "nothing here" instead of an error.
export class ExploreStore {
  inventory: InventoryPanel = { state: 'empty' };
  cluster: ClusterPanel = { state: 'empty' };
  allClusters: Cluster[] = [];

  constructor(private api: ApiClient) {}

  async lookupInventory(entity: string): Promise<InventoryPanel> {
    const name = entity.trim();
    if (!name) {
      this.inventory = { state: 'empty' };
      return this.inventory;
    }
    try {
      this.inventory = { state: 'ready', inventory: await this.api.inventory(name) };
    } catch (err) {
      if (err instanceof ApiError && err.status === 404) {
        this.inventory = { state: 'unknown', entity: name };
      } else {
        throw err;
      }
    }
    return this.inventory;
  }

  async lookupCluster(seed: string, kind: 'entity' | 'value'): Promise<ClusterPanel> {
    const name = seed.trim();
    if (!name) {
      this.cluster = { state: 'empty' };
      return this.cluster;
    }
    try {
      this.cluster = { state: 'ready', cluster: await this.api.cluster(name, kind) };
    } catch (err) {
      if (err instanceof ApiError && err.status === 404) {
        this.cluster = { state: 'unknown', seed: name };
      } else {
        throw err;
      }
    }
    return this.cluster;
  }

  async loadClusterList(): Promise<Cluster[]> {
    this.allClusters = await this.api.clusters();
    return this.allClusters;
  }
}
