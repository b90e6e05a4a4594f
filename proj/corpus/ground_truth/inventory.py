import json
from dataclasses import dataclass, field


@dataclass
class Item:
    sku: str
    name: str
    quantity: int = 0
    tags: list = field(default_factory=list)


class Inventory:
    def __init__(self):
        self.items = {}
        self.log = []

    def add(self, sku, name, quantity=1):
        item = self.items.get(sku)
        if item is None:
            item = Item(sku, name)
            self.items[sku] = item
        item.quantity += quantity
        self.log.append(("add", sku, quantity))
        return item

    def remove(self, sku, quantity=1):
        item = self.items.get(sku)
        if item is None:
            raise KeyError(sku)
        if item.quantity < quantity:
            raise ValueError("not enough stock for " + sku)
        item.quantity -= quantity
        self.log.append(("remove", sku, quantity))
        if item.quantity == 0:
            del self.items[sku]
        return item

    def total(self):
        count = 0
        for item in self.items.values():
            count += item.quantity
        return count

    def tagged(self, tag):
        result = []
        for item in self.items.values():
            if tag in item.tags:
                result.append(item)
        return result

    def to_json(self):
        data = []
        for sku in sorted(self.items):
            item = self.items[sku]
            data.append({"sku": item.sku, "name": item.name, "quantity": item.quantity})
        return json.dumps(data)


def load(text):
    inventory = Inventory()
    for row in json.loads(text):
        inventory.add(row["sku"], row["name"], row["quantity"])
    return inventory
