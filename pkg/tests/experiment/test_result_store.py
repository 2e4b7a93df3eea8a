import threading
import unittest

from src.experiment.result_store import ThreadSafeResultStore


class TestThreadSafeResultStore(unittest.TestCase):
    def setUp(self):
        self.store = ThreadSafeResultStore()

    def test_add_and_get_result(self):
        rows = ["row-a", "row-b"]
        self.store.add((0, 5, 10), rows)

        self.assertIs(self.store.get((0, 5, 10)), rows)
        self.assertEqual(self.store.count(), 1)

    def test_add_existing_key_raises_error(self):
        self.store.add((0, 5, 10), "first")
        with self.assertRaisesRegex(ValueError, "already recorded"):
            self.store.add((0, 5, 10), "second")

    def test_get_missing_result(self):
        self.assertIsNone(self.store.get((9, 9, 9)))

    def test_max_cells_limit(self):
        store = ThreadSafeResultStore(max_cells=2)
        store.add((0,), "a")
        store.add((1,), "b")
        with self.assertRaisesRegex(ValueError, "full"):
            store.add((2,), "c")

    def test_non_positive_limit_means_unlimited(self):
        store = ThreadSafeResultStore(max_cells=0)
        for key in range(5):
            store.add((key,), key)
        self.assertEqual(store.count(), 5)

    def test_sorted_items_ignore_insertion_order(self):
        for key in [(1, 2), (0, 9), (1, 1), (0, 3)]:
            self.store.add(key, sum(key))

        self.assertEqual(
            [key for key, _ in self.store.sorted_items()],
            [(0, 3), (0, 9), (1, 1), (1, 2)],
        )

    def test_thread_safety_concurrent_adds(self):
        num_threads = 8
        per_thread = 50

        def add_results_task(thread_id):
            for i in range(per_thread):
                self.store.add((thread_id, i), thread_id * per_thread + i)

        threads = [
            threading.Thread(target=add_results_task, args=(t,)) for t in range(num_threads)
        ]
        for thread in threads:
            thread.start()
        for thread in threads:
            thread.join()

        self.assertEqual(self.store.count(), num_threads * per_thread)
        values = [value for _, value in self.store.sorted_items()]
        self.assertEqual(values, list(range(num_threads * per_thread)))


if __name__ == "__main__":
    unittest.main()
